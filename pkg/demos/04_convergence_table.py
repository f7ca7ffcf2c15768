"""Macro-step convergence for Example 2, a short version of the first table.

Pass --full to use the whole horizon (a minute or so).
"""
import sys

from fracms import MacroConfig, convergence_order, get_problem, multiscale_solve

horizon = None if "--full" in sys.argv else 2000.0
problem = get_problem("example2", horizon=horizon)

multiscale_solve(problem, MacroConfig(dT=20, dt=0.01, horizon=40.0))  # compile

rows = []
for dT in (20, 10, 5, 2, 1):
    _, rep = multiscale_solve(problem, MacroConfig(dT=dT, dt=0.01, keep_cells=False))
    rows.append((dT, rep.l1_error, rep.linf_error, rep.wall_seconds))

print(f"horizon {problem.horizon:g}")
print(f"{'dT':>4} {'L1':>10} {'Linf':>10} {'order':>7} {'time':>7}")
for k, (dT, l1, linf, wall) in enumerate(rows):
    order = ""
    if k:
        fit = convergence_order([(rows[k - 1][0], rows[k - 1][1]), (dT, l1)])
        order = f"{fit.pairwise[0]:.4f}"
    print(f"{dT:>4} {l1:10.4f} {linf:10.4f} {order:>7} {wall:6.2f}s")

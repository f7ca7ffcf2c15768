"""Solvers for two-scale systems of a fast ODE and a slow Caputo-fractional ODE.

The fast variable obeys v' + g(u, v) = f(t) with locally periodic forcing;
the slow one obeys D^alpha u = eps R(t, u, v).  Two solvers are provided:
:func:`direct_solve` resolves the micro grid over the whole horizon, and
:func:`multiscale_solve` steps the slow variable on a macro grid using
periodic fast cells.
"""
from .analysis import (ConvergenceFit, RunReport, Trajectory, convergence_order,
                       error_norms, load_artifact)
from .direct import DirectConfig, direct_solve
from .exceptions import (DivergenceError, FracMSError, HistoryLengthError,
                         NonConvergenceError, ProbeError, UnsupportedCaseError)
from .fast import (CellSolution, FastField, StepScheme, euler_step, integrate_cycle,
                   shoot_periodic)
from .fractional import (CaputoHistory, FractionalOrder, L1Weights, caputo_analytic,
                         caputo_l1_advance, l1_weights)
from .multiscale import (MacroConfig, MacroState, cell_average, multiscale_solve,
                         reconstruct_fast)
from .problems import (AssumptionReport, CoupledProblem, assumption_probe, example1,
                       example2, example3, example4, get_problem, residuals)

__version__ = "0.1.0"

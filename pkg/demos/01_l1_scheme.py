"""Reconstruct u(t) = t^2 from its Caputo derivative with the L1 scheme.

Run with:  python3 demos/01_l1_scheme.py
"""
import numpy as np

from fracms import CaputoHistory, caputo_analytic, caputo_l1_advance, l1_weights

alpha = 0.6

# the weights start at 1 and decay like j^(-alpha)
w = l1_weights(alpha, 8)
print("first weights:", np.round(w.a[:5], 6))

# feed the exact derivative in, step by step, and compare with t^2 at t = 1
errors = []
for n in (32, 64, 128, 256, 512):
    h = CaputoHistory(alpha, 1.0 / n, 0.0, n)
    for i in range(1, n + 1):
        h.append(caputo_l1_advance(h, caputo_analytic(2, alpha, i / n)))
    errors.append(abs(h.grid_values[-1] - 1.0))
    print(f"n={n:4d}  error at t=1: {errors[-1]:.3e}")

# each halving should shrink the error by about 2^(2-alpha)
ratios = np.array(errors[:-1]) / np.array(errors[1:])
print("ratios:", np.round(ratios, 3), " expected ~", round(2 ** (2 - alpha), 3))

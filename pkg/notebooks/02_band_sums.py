"""
Band sums of the Taylor expansion
=================================

G_N(x, y; j) groups the expansion of f(x + y) about y into blocks of N
terms.  At x = tau, y = 1 - tau the blocks are the probabilities
P(V_N = j), and they add up to f(1) = 1.
"""
import numpy as np

from narygw import Geometric, g0_slope, g_eval, tau_iterate
from narygw.gfun import g_bands, partition_sum

law = Geometric(13 / 14)
N = 2
tau = tau_iterate(law, N).tau

# %% the first few blocks
bands = g_bands(law, N, tau, 1 - tau, 9)
print(np.round(bands, 4))

# %% partition of unity
total, used = partition_sum(law, N, tau)
print(f"sum of {used} blocks = {total:.15f}")

# %% x -> G_N(1 - x, x; 0) only increases; its slope is a single term
for x in (0.1, 0.5, 0.9):
    print(x, g_eval(law, N, 0, 1 - x, x), g0_slope(law, N, x))

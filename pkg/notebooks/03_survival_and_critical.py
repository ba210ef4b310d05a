"""
Survival probability and critical means
=======================================

tau_N = P(V_N > 0) is the limit of the non-increasing sequence
tau_{N,n}.  For N >= 2 it jumps from 0 to a positive value as the mean
crosses a critical value.
"""
import numpy as np

from narygw import Poisson, cayley_tree, critical_mean, critical_y, tau_iterate

# %% iteration from tau_{N,0} = 1
run = tau_iterate(Poisson(13.0), 3, n_steps=8)
print(np.round(run.trajectory, 6))

# %% the jump at the critical mean
cv = critical_mean("poisson", 2)
print(f"m_c = {cv.m_crit:.8f}, tau_c = {cv.tau_crit:.6f}")
for m in (cv.m_crit - 1e-4, cv.m_crit + 1e-4, 4.0, 6.0):
    print(f"m = {m:.6f}  tau_2 = {tau_iterate(Poisson(m), 2).tau:.6f}")

# %% the binary case through the tree function y = z e^y (upper branch)
print(critical_y(2), cayley_tree(1 / cv.m_crit, branch="upper"))

# %% critical means for N = 2..5
for family in ("poisson", "geometric"):
    print(family, [round(critical_mean(family, N).m_crit, 4) for N in range(2, 6)])

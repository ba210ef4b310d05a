"""
Monte Carlo check
=================

Simulated trees against the exact finite-height value tau_{N,n}.
Results depend only on the seed, not on the number of workers.
"""
import numpy as np

from narygw import Geometric, Poisson, tau_iterate
from narygw.mc import mc_estimate

law = Geometric(13 / 14)
exact = tau_iterate(law, 2, n_steps=8).tau
s = mc_estimate(law, 2, 8, 20_000, seed=1)
print(f"tau_hat = {s.tau_hat:.4f} +/- {s.tau_stderr:.4f}  exact {exact:.4f}  CI {s.tau_ci}")

# %% same seed, different worker count
t = mc_estimate(law, 2, 8, 20_000, seed=1, workers=2)
print("identical:", np.array_equal(s.counts, t.counts))

# %% full trees give the total progeny as well
s = mc_estimate(Poisson(1.5), 2, 5, 10_000, seed=2, progeny=True)
print(f"mean nu_5 = {s.mean_nu:.2f} (exact {sum(1.5**k for k in range(6)):.2f})")

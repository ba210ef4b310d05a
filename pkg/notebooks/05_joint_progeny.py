"""
Joint law of V_{N,n} and total progeny
======================================

Truncated power series in s carry the total-progeny dimension.  With a
small law the whole distribution fits inside the truncation and agrees
with listing every tree.
"""
import numpy as np

from narygw import Generic, Geometric, joint_run
from narygw.mc import brute_force_joint

law = Generic((0.2, 0.3, 0.0, 0.5))
table = joint_run(law, 2, 3, T=64)
brute = brute_force_joint(law, 2, 3)
worst = max(abs(table.probs[j, t] - p) for (j, t), p in brute.items())
print(f"{len(brute)} cells, largest gap {worst:.1e}, deficit {table.deficit:.1e}")

# %% marginals
print("P(V=j):", np.round(table.marginal_v(), 4))
print("E nu:", float(np.dot(np.arange(table.T + 1), table.marginal_nu())))

# %% a supercritical law loses mass past the truncation degree
big = joint_run(Geometric(13 / 14), 2, 4, T=32)
print("retained mass per generation:", np.round(big.retained_mass, 4))

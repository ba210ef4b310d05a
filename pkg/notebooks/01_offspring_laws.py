"""
Offspring laws
==============

Each law knows its pgf f(s), its probability list, and the scaled
derivatives T_k(y) = f^(k)(y)/k! used everywhere else.
"""
import numpy as np

from narygw import Generic, Geometric, OneOrMany, Poisson, make_law

# %% three laws with mean close to 13
laws = [Geometric.from_mean(13.0), Poisson(13.0), OneOrMany(0.93, 14)]
for law in laws:
    print(f"{law!r:45s} mean={law.mean:.2f}  f(0)={law.pgf(0.0):.3e}")

# %% x^k T_k(y) with x + y <= 1 stays finite far past where k! overflows
geo = laws[0]
k = np.array([0, 10, 100, 1000])
print(geo.scaled_terms(k, 0.1, 0.9))

# %% laws can be built from plain dictionaries (the CLI accepts the same JSON)
law = make_law({"family": "generic", "coeffs": [0.2, 0.3, 0.0, 0.5]})
print(law, law.taylor_coeff(3, 0.4))

# %% sampling
rng = np.random.default_rng(0)
print(np.bincount(Generic((0.2, 0.3, 0.0, 0.5)).sample(rng, 10_000)) / 10_000)

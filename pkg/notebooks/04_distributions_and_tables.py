"""
Distribution of V_N and the three reference tables
==================================================

The general route sums Taylor blocks; for the fractional linear,
Poisson and one-or-many families there are closed forms.
"""
import numpy as np

from narygw import OneOrMany, Poisson, pmf_closed_form, pmf_vn
from narygw.tables import table_csv

# %% two routes, one answer
law = Poisson(13.0)
a = pmf_vn(law, 3)
b = pmf_closed_form(law, 3)
print(np.round(a.probs[:10], 4), a.mean)
print("max difference", np.max(np.abs(a.probs[: b.probs.size] - b.probs[: a.probs.size])))

# %% the one-or-many law has structural zeros beyond r // N
print(np.round(pmf_closed_form(OneOrMany(0.93, 14), 4).probs, 4))

# %% the tables, rounded to two decimals
for which in (1, 2, 3):
    print(table_csv(which))

"""Counting disjoint complete N-ary subtrees rooted at the ancestor of a
Galton-Watson family tree: exact distributions, joint laws with total
progeny, critical values and Monte Carlo checks."""
from .dist import (
    PmfTable,
    pgf_v1,
    pmf_closed_form,
    pmf_fractional_linear,
    pmf_one_or_many,
    pmf_poisson,
    pmf_vn,
)
from .errors import (
    BudgetDominated,
    DomainError,
    NarygwError,
    NoConvergence,
    ParamOutOfRange,
    PmfNotNormalized,
    TooLarge,
    TruncationMismatch,
    UnsupportedFamily,
)
from .gfun import g0_slope, g_eval
from .joint import JointTable, joint_init, joint_run, joint_step
from .offspring import (
    FractionalLinear,
    Generic,
    Geometric,
    OffspringLaw,
    OneOrMany,
    Poisson,
    make_law,
)
from .series import TruncatedSeries, series_g_eval, series_taylor_coeff
from .solver import (
    CriticalValue,
    FixedPointResult,
    cayley_tree,
    critical_mean,
    critical_y,
    sufficient_condition,
    tau_family,
    tau_iterate,
)

__version__ = "0.1.0"

import math

import numpy as np
import pytest
from scipy.special import lambertw
from scipy.stats import binom

from narygw import (
    DomainError,
    FractionalLinear,
    Generic,
    Geometric,
    OneOrMany,
    Poisson,
    UnsupportedFamily,
    cayley_tree,
    critical_mean,
    critical_y,
    sufficient_condition,
    tau_family,
    tau_iterate,
)
from narygw.solver import cayley_series, critical_y_residual, residual


def quadratic_tau(m):
    """Largest root in [0, 1] of (tau + 1/m)^2 = tau (geometric, N = 2)."""
    a = 1 / m
    disc = (1 - 2 * a) ** 2 - 4 * a * a
    if disc < 0:
        return 0.0
    return ((1 - 2 * a) + math.sqrt(disc)) / 2


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_deterministic_tree_survives(N):
    law = Generic(tuple([0.0] * N + [1.0]))
    assert tau_iterate(law, N).tau == pytest.approx(1.0)


@pytest.mark.parametrize("m", [4.5, 6.0, 13.0, 40.0])
def test_geometric_binary_quadratic(m):
    law = Geometric.from_mean(m)
    assert tau_iterate(law, 2).tau == pytest.approx(quadratic_tau(m), abs=1e-12)
    assert tau_family(law, 2).tau == pytest.approx(quadratic_tau(m), abs=1e-12)


def test_geometric_m13_closed_form():
    assert tau_iterate(Geometric(13 / 14), 2).tau == pytest.approx((11 + math.sqrt(117)) / 26, abs=1e-13)


def test_subcritical_gives_zero():
    assert tau_iterate(Geometric.from_mean(2.0), 2).tau < 1e-12
    assert tau_family(Geometric.from_mean(2.0), 2).tau < 1e-12
    assert tau_iterate(Poisson(3.3509), 2).tau < 1e-12


def test_extinction_probability_n1():
    assert 1 - tau_iterate(Geometric(13 / 14), 1).tau == pytest.approx(1 / 13, abs=1e-13)
    m = 2.0
    q = 1 - tau_iterate(Poisson(m), 1).tau
    assert q == pytest.approx(math.exp(m * (q - 1)), abs=1e-13)
    assert q == pytest.approx(-lambertw(-m * math.exp(-m)).real / m, abs=1e-12)


def test_one_or_many_n5():
    p, r = 0.93, 14
    tau = tau_iterate(OneOrMany(p, r), 5).tau
    assert 1 - tau == pytest.approx(1 - p + p * binom.cdf(4, r, tau), abs=1e-13)
    assert round(1 - tau, 2) == 0.07


def test_poisson_binary_equation():
    tau = tau_iterate(Poisson(13.0), 2).tau
    assert (1 - tau) * math.exp(13 * tau) == pytest.approx(1 + 13 * tau, rel=1e-12)
    assert 1 - tau < 0.005


LAWS = [Geometric(13 / 14), Geometric.from_mean(5.0), Poisson(13.0), Poisson(5.0), OneOrMany(0.93, 14),
        FractionalLinear(0.9, 0.05)]


@pytest.mark.parametrize("law", LAWS, ids=repr)
@pytest.mark.parametrize("N", [1, 2, 3, 4, 5])
def test_iteration_and_family_equation_agree(law, N):
    it = tau_iterate(law, N)
    fam = tau_family(law, N)
    assert abs(it.tau - fam.tau) < 1e-10
    assert it.residual < 1e-12


def test_family_equation_needs_a_family():
    with pytest.raises(UnsupportedFamily):
        tau_family(Generic((0.5, 0.0, 0.5)), 2)


@pytest.mark.parametrize("law", LAWS, ids=repr)
def test_trajectory_non_increasing_to_limit(law):
    for N in (1, 2, 3):
        run = tau_iterate(law, N, n_steps=40)
        traj = np.array(run.trajectory)
        assert traj[0] == 1.0 and traj.size == 41
        assert np.all(np.diff(traj) <= 0)
        assert traj[-1] >= tau_iterate(law, N).tau - 1e-12


def test_trajectory_first_step_is_tail_probability():
    law = Poisson(3.0)
    for N in (1, 2, 3):
        tau1 = tau_iterate(law, N, n_steps=1).tau
        assert tau1 == pytest.approx(1 - law.coeffs[:N].sum(), abs=1e-14)


def test_tau_non_increasing_in_N():
    for law in LAWS:
        taus = [tau_iterate(law, N).tau for N in range(1, 6)]
        assert all(a >= b - 1e-12 for a, b in zip(taus, taus[1:]))


def test_critical_values():
    assert critical_mean("poisson", 3).m_crit == pytest.approx(5.1494, abs=1e-3)
    assert critical_mean("geometric", 4).m_crit == pytest.approx(9.481, abs=1e-2)
    assert critical_mean("geometric", 1).m_crit == 1.0
    for N in (2, 3, 4, 5):
        exact = N**N / (N - 1) ** (N - 1)
        assert critical_mean("geometric", N).m_crit == pytest.approx(exact, rel=1e-8)


def test_critical_mean_is_a_threshold():
    for family in ("poisson", "geometric"):
        cv = critical_mean(family, 3)
        below = Poisson(cv.m_crit * 0.999) if family == "poisson" else Geometric.from_mean(cv.m_crit * 0.999)
        above = Poisson(cv.m_crit * 1.001) if family == "poisson" else Geometric.from_mean(cv.m_crit * 1.001)
        assert tau_iterate(below, 3).tau < 1e-9
        assert tau_iterate(above, 3).tau > 0.1


def test_critical_one_or_many():
    cv = critical_mean("one-or-many", 2, r=6)
    law = lambda m: OneOrMany((m - 1) / 5, 6)
    assert tau_iterate(law(cv.m_crit * 0.999), 2).tau < 1e-9
    assert tau_iterate(law(cv.m_crit * 1.001), 2).tau > 0.1


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_critical_y(N):
    y = critical_y(N)
    assert abs(critical_y_residual(N, y)) < 1e-12
    m = math.exp(y) * math.factorial(N - 1) / y ** (N - 1)
    assert m == pytest.approx(critical_mean("poisson", N).m_crit, rel=1e-12)


def test_cayley_tree():
    assert cayley_tree(0.0) == 0.0
    assert cayley_tree(1 / math.e) == pytest.approx(1.0, abs=1e-7)
    assert cayley_tree(1 / math.e, branch="upper") == pytest.approx(1.0, abs=1e-7)
    for z in (0.01, 0.1, 0.2, 0.3, 0.36):
        y = cayley_tree(z)
        assert y == pytest.approx(-lambertw(-z).real, rel=1e-13)
        assert y == pytest.approx(z * math.exp(y), rel=1e-14)
        upper = cayley_tree(z, branch="upper")
        assert upper == pytest.approx(-lambertw(-z, k=-1).real, rel=1e-12)
        assert upper > 1.0
    assert cayley_tree(0.2) == pytest.approx(cayley_series(0.2), rel=1e-13)
    assert cayley_tree(1 / 3.3509, branch="upper") == pytest.approx(1.7933, abs=1e-3)


def test_cayley_domain():
    with pytest.raises(DomainError):
        cayley_tree(0.5)
    with pytest.raises(DomainError):
        cayley_tree(-0.1)


def test_sufficient_condition():
    assert sufficient_condition(OneOrMany(0.93, 14), 2)
    assert not sufficient_condition(Geometric.from_mean(2.0), 2)
    # no mass at or above N: holds vacuously although tau_N = 0
    law = Generic((0.5, 0.5))
    assert sufficient_condition(law, 2)
    assert tau_iterate(law, 2).tau == 0.0
    with pytest.raises(DomainError):
        sufficient_condition(law, 1)


@pytest.mark.parametrize("law", LAWS, ids=repr)
def test_sufficient_condition_implies_survival(law):
    for N in (2, 3, 4, 5):
        if sufficient_condition(law, N):
            assert tau_iterate(law, N).tau > 0


def test_bad_N():
    with pytest.raises(DomainError):
        tau_iterate(Poisson(2.0), 0)
    with pytest.raises(DomainError):
        tau_iterate(Poisson(2.0), 1.5)


def test_residual_at_fixed_point():
    law = Poisson(13.0)
    tau = tau_iterate(law, 3).tau
    assert residual(law, 3, tau) < 1e-14
    assert residual(law, 3, tau - 1e-3) > 1e-6

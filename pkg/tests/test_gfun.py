import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from narygw import DomainError, Generic, Geometric, OneOrMany, Poisson, g0_slope, g_eval
from narygw.gfun import g_bands, partition_sum

TAU2 = (11 + math.sqrt(117)) / 26  # geometric m=13, N=2

LAWS = [Geometric(13 / 14), Poisson(13.0), Poisson(2.5), OneOrMany(0.93, 14),
        Generic((0.2, 0.3, 0.0, 0.5))]


def test_zero_x():
    law = Poisson(3.0)
    assert g_eval(law, 3, 0, 0.0, 0.4) == pytest.approx(law.pgf(0.4))
    assert g_eval(law, 3, 1, 0.0, 0.4) == 0.0


@pytest.mark.parametrize("N", [1, 2, 3, 5])
def test_deterministic_nary_law(N):
    law = Generic(tuple([0.0] * N + [1.0]))
    assert g_eval(law, N, 1, 1.0, 0.0) == pytest.approx(1.0)
    assert g_eval(law, N, 0, 1.0, 0.0) == 0.0


def test_table_one_entry():
    assert g_eval(Geometric(13 / 14), 2, 0, TAU2, 1 - TAU2) == pytest.approx(1 - TAU2, abs=1e-12)
    assert round(g_eval(Geometric(13 / 14), 2, 0, TAU2, 1 - TAU2), 2) == 0.16


@pytest.mark.parametrize("law", LAWS, ids=repr)
@pytest.mark.parametrize("N", [1, 2, 4])
def test_bands_match_single_evaluations(law, N):
    bands = g_bands(law, N, 0.7, 0.3, 6)
    single = [g_eval(law, N, j, 0.7, 0.3) for j in range(7)]
    np.testing.assert_allclose(bands, single, rtol=1e-14, atol=1e-300)


@pytest.mark.parametrize("law", LAWS, ids=repr)
@pytest.mark.parametrize("N", [1, 2, 3, 5])
@pytest.mark.parametrize("x", [0.1, 0.5, 0.84, 0.99])
def test_partition_of_unity(law, N, x):
    total, used = partition_sum(law, N, x)
    assert abs(total - 1.0) < 1e-11
    assert used >= 1


def test_g0_slope_examples():
    law = Geometric(13 / 14)
    for N in (2, 3, 5):
        assert g0_slope(law, N, 1.0) == 0.0
    for x in (0.0, 0.3, 0.8):
        assert g0_slope(law, 1, x) == pytest.approx(law.taylor_coeff(1, x))
    h = 1e-6
    fd = (g_eval(law, 2, 0, 0.5 - h, 0.5 + h) - g_eval(law, 2, 0, 0.5 + h, 0.5 - h)) / (2 * h)
    assert g0_slope(law, 2, 0.5) == pytest.approx(fd, rel=1e-5)


@pytest.mark.parametrize("law", LAWS, ids=repr)
@pytest.mark.parametrize("N", [1, 2, 3])
def test_monotone_in_complementary_direction(law, N):
    x = np.linspace(0.0, 1.0, 201)
    values = np.array([g_eval(law, N, 0, 1 - u, u) for u in x])
    assert np.all(np.diff(values) >= -1e-14)
    assert all(g0_slope(law, N, u) >= 0 for u in x)


def test_errors():
    law = Poisson(1.0)
    with pytest.raises(DomainError):
        g_eval(law, 0, 0, 0.5, 0.5)
    with pytest.raises(DomainError):
        g_eval(law, 2, -1, 0.5, 0.5)
    with pytest.raises(DomainError):
        g_eval(law, 2, 0, 1.5, 0.5)
    with pytest.raises(DomainError):
        g0_slope(law, 2, -0.1)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(0.0, 1.0), min_size=2, max_size=7).filter(lambda w: sum(w) > 0.1),
    st.integers(1, 4),
    st.floats(0.0, 1.0),
)
def test_slope_nonnegative_and_partition(weights, N, x):
    law = Generic(tuple(np.array(weights) / sum(weights)))
    assert g0_slope(law, N, x) >= 0.0
    bands = g_bands(law, N, x, 1.0 - x, law.support_max // N + 1)
    assert math.fsum(bands) == pytest.approx(1.0, abs=1e-12)

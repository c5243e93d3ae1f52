import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chainkit.core import IndexedVector, UsageError, fits_level
from chainkit.cover import (
    ParameterError,
    audit_cover,
    ball_cube_cover,
    ball_samples,
    base_level,
    budget_count,
    calibrate_sigma,
    ellipsoid_entropy_bound,
    lattice_count,
    m_sequence,
    middle_range,
    regime_for,
    smallest_m,
)


def brute_budget(N, m):
    J = int(math.isqrt(m)) + 1
    return sum(
        1
        for k in itertools.product(range(-J, J + 1), repeat=N)
        if sum((2 * abs(x) - 1) ** 2 for x in k if x) <= m
    )


def brute_lattice(N, h):
    K = int(math.ceil(1 / h)) + 1
    n = 0
    for k in itertools.product(range(-K, K + 1), repeat=N):
        gap = sum(max(abs(x) * h - h / 2, 0) ** 2 for x in k)
        n += gap <= 1 + 1e-12
    return n


@pytest.mark.parametrize("N,m", [(1, 4), (2, 1), (2, 9), (3, 10), (4, 17)])
def test_budget_count_matches_enumeration(N, m):
    assert budget_count(N, m) == brute_budget(N, m)


@pytest.mark.parametrize("N,h", [(2, 0.5), (2, 0.31), (3, 0.4), (4, 0.7)])
def test_lattice_count_matches_enumeration(N, h):
    assert lattice_count(N, h) == brute_lattice(N, h)


def test_base_level_and_ranges():
    assert [base_level(N) for N in (2, 3, 4, 5, 8, 9)] == [1, 2, 2, 3, 3, 4]
    assert list(middle_range(4, 1)) == [2, 3]
    assert regime_for(4, 0, 1) == "low" and regime_for(4, 2, 1) == "middle" and regime_for(4, 4, 1) == "high"


@given(st.integers(2, 4096), st.integers(1, 4), st.integers(0, 16))
def test_smallest_m_is_smallest(N, sigma, n):
    m = smallest_m(N, sigma, n)
    f = lambda k: k * math.log(math.e * N / k)
    if m is None:
        assert f(N) < 2 ** (n - sigma)
    else:
        assert f(m) >= 2 ** (n - sigma) and (m == 1 or f(m - 1) < 2 ** (n - sigma))


@pytest.mark.parametrize("N", [2, 3, 4, 16, 100])
def test_m_sequence_growth_checks(N):
    seq = m_sequence(N, calibrate_sigma(N))
    assert all(seq.upper_ok) and all(seq.floor_ok) and all(seq.ratio_ok)
    assert all(1 <= m <= N for m in seq.m)
    # the defining inequality fails only at a capped level
    assert all(ok or c for ok, c in zip(seq.lower_ok, seq.capped))


def test_m_sequence_capped_level_when_n_is_not_a_power_of_two():
    # N = 3: the top level needs 4 <= m log(3e/m), but m log(3e/m) <= 3 on [1, 3]
    seq = m_sequence(3, 1)
    assert seq.capped == [False, True] and seq.lower_ok == [True, False] and not seq.ok
    assert m_sequence(4, 1).ok and m_sequence(2, 1).ok


def test_calibrated_sigma_small_dimensions():
    assert [calibrate_sigma(N) for N in (2, 3, 4, 16)] == [1, 1, 1, 1]


@pytest.mark.parametrize("N", [2, 3, 4])
def test_all_regimes_certified_and_audited(N):
    sigma = calibrate_sigma(N)
    seen = set()
    for n in range(base_level(N) + sigma + 3):
        c = ball_cube_cover(N, n, sigma)
        seen.add(c.regime)
        assert c.certified
        if c.count is not None:
            assert fits_level(c.count, n + sigma)
        a = audit_cover(c, 2000, seed=n)
        assert a.misses == 0
    assert seen == {"low", "middle", "high"}


def test_middle_budget_equals_geometric_test():
    c = ball_cube_cover(4, 3, 1, "middle")
    K = 4
    ks = np.array(list(itertools.product(range(-K, K + 1), repeat=4)))
    t = c.side / 2
    gap = np.maximum(np.abs(ks) * c.side - t, 0)
    assert np.array_equal(c.contains_cube(ks), (gap**2).sum(axis=1) <= 1 + 1e-12)
    assert len(c.cubes()) == c.count


def test_forced_regime_outside_range_rejected():
    with pytest.raises(UsageError):
        ball_cube_cover(4, 0, 1, "middle")
    with pytest.raises(UsageError):
        ball_cube_cover(4, 1, 1, "high")
    with pytest.raises(UsageError):
        ball_cube_cover(4, 1, 1, "diagonal")


def test_strict_certificate_failure_raises():
    # in N = 64 with sigma = 1 some high-regime level overshoots N_{n+1}
    with pytest.raises(ParameterError):
        for n in range(base_level(64), base_level(64) + 6):
            ball_cube_cover(64, n, 1, "high")


def test_ball_samples_inside_ball():
    x = ball_samples(3, 5000, 1)
    assert x.shape == (5000, 3) and np.all((x**2).sum(axis=1) <= 1)
    assert np.array_equal(x, ball_samples(3, 5000, 1))


def test_audit_csv_header():
    a = audit_cover(ball_cube_cover(2, 3, 1), 10, 0)
    assert a.to_csv().splitlines()[0] == "point_id,cube_id,linf_residual"


def test_ellipsoid_entropy_hand_value():
    e = ellipsoid_entropy_bound(IndexedVector(np.ones(4)), IndexedVector(np.ones(4)))
    assert e.terms == pytest.approx([1, math.sqrt(2), 2])
    assert e.schwartz_cap == pytest.approx(8) and e.ok


@settings(max_examples=200)
@given(st.integers(1, 64), st.integers(0, 2**32))
def test_schwartz_chain_property(d, seed):
    r = np.random.default_rng(seed)
    x, t = r.normal(size=d) * r.exponential(size=d), r.normal(size=d) * r.exponential(size=d)
    e = ellipsoid_entropy_bound(IndexedVector(x), IndexedVector(t))
    assert e.value <= e.schwartz_cap + 1e-12

import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import optimize

from chainkit.core import PointSet, UsageError, inverse_level_cardinality
from chainkit.metrics import (
    DistanceMatrix,
    RangeError,
    canonical_distance,
    empirical_excess,
    empirical_quantile_distance,
    empirical_quantile_family,
    gaussian_moment_norm,
    gaussian_quantile_distance,
    gaussian_quantile_family,
    half_normal_excess,
    minimal_admissible_constant,
    moment_distance,
    scaled_canonical_family,
    unit_gaussian_quantile,
    weighted_distance,
)

FIXTURES = Path(__file__).parent / "fixtures"
samples_st = arrays(np.float64, st.integers(1, 40), elements=st.floats(-1e3, 1e3, allow_nan=False, allow_subnormal=False))


def _brentq_quantile(s, n):
    s = np.abs(s)
    c = inverse_level_cardinality(n)
    if s.max() == 0:
        return 0.0
    # the root lies in [max / (1 + m c), sum / (m c)]
    lo = s.max() / (2 * (1 + s.size * c))
    hi = 2 * s.sum() / (s.size * c)
    return optimize.brentq(lambda q: empirical_excess(s, q) - c, lo, hi, xtol=1e-300, rtol=1e-14)


@given(samples_st, st.integers(0, 5))
def test_empirical_quantile_matches_root_finder(s, n):
    got = empirical_quantile_distance(s, n)
    ref = _brentq_quantile(s, n)
    assert got == pytest.approx(ref, rel=1e-9, abs=1e-12)
    if got > 0:
        assert empirical_excess(s, got) == pytest.approx(inverse_level_cardinality(n), rel=1e-9)


@given(samples_st)
def test_empirical_quantile_monotone_in_level(s):
    q = [empirical_quantile_distance(s, n) for n in range(7)]
    assert all(b >= a * (1 - 1e-12) for a, b in zip(q, q[1:]))


@given(samples_st, st.integers(0, 8))
def test_moment_distance_dominates_quantile(s, n):
    # Markov: E(|D|/q - 1)_+ <= E(|D|/q)^p = 2^-p <= 1/N_n at q = 2 ||D||_p
    assert moment_distance(s, n) >= empirical_quantile_distance(s, n) * (1 - 1e-12)


def test_empirical_quantile_level0_is_mean_over_half():
    # N_0 = 1: E(|D|/q - 1)_+ = 1 has root q = E|D|/2 when every |D| exceeds it
    s = np.array([1.0, 2.0, 3.0])
    assert empirical_quantile_distance(s, 0) == pytest.approx(1.0)


def test_empirical_quantile_rejects_empty():
    with pytest.raises(UsageError):
        empirical_quantile_distance([], 1)


def test_unit_gaussian_quantile_against_quadrature_fixture():
    doc = json.loads((FIXTURES / "quantile_band.json").read_text())
    for n, v in doc["a_star"].items():
        assert unit_gaussian_quantile(int(n)) == pytest.approx(float(v), rel=1e-10)


def test_unit_gaussian_quantile_root_identity():
    for n in range(9):
        a = unit_gaussian_quantile(n)
        assert half_normal_excess(a) / a == pytest.approx(inverse_level_cardinality(n), rel=1e-8)


def test_gaussian_quantile_large_levels_finite_and_increasing():
    vals = [unit_gaussian_quantile(n) for n in range(0, 16)]
    assert all(np.isfinite(vals)) and all(b > a for a, b in zip(vals, vals[1:]))
    # a*_n ~ sqrt(2 log N_n) to leading order
    assert vals[15] / math.sqrt(2 * 2**15 * math.log(2)) == pytest.approx(1.0, rel=0.02)


def test_gaussian_quantile_scales_linearly():
    assert gaussian_quantile_distance(0.0, 3) == 0.0
    assert gaussian_quantile_distance(2.5, 4) == pytest.approx(2.5 * unit_gaussian_quantile(4), rel=1e-15)
    with pytest.raises(UsageError):
        gaussian_quantile_distance(-1.0, 2)


def test_gaussian_quantile_versus_empirical_large_sample():
    z = np.random.default_rng(5).normal(size=400_000)
    assert empirical_quantile_distance(z, 2) == pytest.approx(unit_gaussian_quantile(2), rel=0.02)


def test_gaussian_moment_norm_closed_forms():
    assert gaussian_moment_norm(1.0, 0) == pytest.approx(math.sqrt(2 / math.pi))
    assert gaussian_moment_norm(1.0, 1) == pytest.approx(1.0)
    assert gaussian_moment_norm(2.0, 2) == pytest.approx(2.0 * 3.0**0.25)
    assert moment_distance({"law": "gaussian", "sigma": 1.0}, 1) == pytest.approx(2.0)


def test_moment_level_range():
    with pytest.raises(RangeError):
        moment_distance([1.0], 1024)
    assert math.isfinite(moment_distance([1e300, 1.0], 10))


def test_distance_matrix_validation_and_csv(tmp_path):
    d = DistanceMatrix([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    assert d.is_metric() and d.diameter() == 2
    path = tmp_path / "d.csv"
    d.to_csv(path)
    assert np.array_equal(DistanceMatrix.from_csv(path).entries, d.entries)
    bad = DistanceMatrix([[0, 1, 3], [1, 0, 1], [3, 1, 0]])
    assert bad.triangle_violation() == pytest.approx(1.0) and not bad.is_metric()
    with pytest.raises(ValueError):
        DistanceMatrix([[0, -1], [-1, 0]])


def test_weighted_distance_reduces_to_canonical():
    T = PointSet(np.random.default_rng(1).normal(size=(5, 3)))
    assert np.allclose(weighted_distance(T, np.ones(3)).entries, canonical_distance(T).entries)
    assert np.allclose(weighted_distance(T, np.zeros(3)).entries, 0)


def test_quantile_family_admissible_and_monotone():
    T = PointSet(np.random.default_rng(2).normal(size=(6, 4)))
    fam = gaussian_quantile_family(T)
    assert fam.monotonicity_violation(8) == 0
    s = scaled_canonical_family(T, minimal_admissible_constant(8), 8)
    assert s.meta["admissible"] and s.dominates(fam, 8, tol=1e-12)
    weak = scaled_canonical_family(T, 0.5 * minimal_admissible_constant(8), 8)
    assert not weak.meta["admissible"] and not weak.dominates(fam, 8)


def test_empirical_family_export(tmp_path):
    T = PointSet(np.eye(3))
    draws = np.random.default_rng(3).normal(size=(500, 3))
    fam = empirical_quantile_family(T, draws, seed=3, n_max=2)
    paths = fam.export_csv(tmp_path)
    assert [p.name for p in paths] == ["level_0.csv", "level_1.csv", "level_2.csv"]
    with pytest.raises(UsageError):
        fam.level(3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 8), st.integers(0, 6))
def test_empirical_quantile_is_a_metric(seed, k, n):
    draws = np.random.default_rng(seed).normal(size=(64, k)) * np.random.default_rng(seed + 1).uniform(0.1, 3, k)
    fam = empirical_quantile_family(PointSet(np.eye(k)), draws, n_max=n)
    assert fam.level(n).triangle_violation() <= 1e-9

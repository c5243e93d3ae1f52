import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chainkit import rng
from chainkit.core import PointSet
from chainkit.mc import (
    BernoulliCanonical,
    CharacterBernoulli,
    GaussianCanonical,
    ProductBernoulli,
    ProductGaussian,
    block_sup,
    character_weights,
    enumerate_signs,
    estimate_product_sup,
    estimate_sup,
    sign_patterns,
    tail_compare,
    wilson_stderr,
)


def test_streams_reproducible_and_chunk_independent():
    a = rng.normals(7, 3, (10, 4))
    assert np.array_equal(a, rng.normals(7, 3, (10, 4)))
    assert not np.array_equal(a, rng.normals(7, 4, (10, 4)))
    assert not np.array_equal(a, rng.normals(8, 3, (10, 4)))


def test_uniform_and_sign_ranges():
    u = rng.uniforms(1, 0, 50_000)
    assert 0 < u.min() and u.max() < 1 and abs(u.mean() - 0.5) < 0.01
    s = rng.signs(1, 0, 50_000)
    assert set(np.unique(s)) == {-1.0, 1.0} and abs(s.mean()) < 0.02


def test_normal_moments():
    z = rng.normals(2, 0, 200_000)
    assert abs(z.mean()) < 0.01 and abs(z.var() - 1) < 0.01


def test_thread_count_never_changes_results(monkeypatch):
    T = PointSet(np.random.default_rng(0).normal(size=(6, 5)))
    base = estimate_sup(GaussianCanonical(T), "increment", 20_000, 11)
    monkeypatch.setenv("CHAINKIT_THREADS", "4")
    assert rng.thread_count() == 4
    again = estimate_sup(GaussianCanonical(T), "increment", 20_000, 11)
    assert again.mean == base.mean and again.stderr == base.stderr
    monkeypatch.setenv("CHAINKIT_THREADS", "junk")
    assert rng.thread_count() == 1


def test_block_sup_modes():
    v = np.array([[1.0, -3.0, 2.0]])
    assert block_sup(v, "absolute")[0] == 3.0
    assert block_sup(v, "increment")[0] == 5.0
    z = np.array([[1.0 + 0j, -1.0 + 0j, 1j]])
    assert block_sup(z, "increment")[0] == pytest.approx(2.0)


def test_half_normal_mean():
    T = PointSet([[0.0, 0.0], [1.0, 0.0]])
    est = estimate_sup(GaussianCanonical(T), "absolute", 100_000, 3)
    assert est.within(math.sqrt(2 / math.pi), 4)


def test_sign_patterns_enumerate_cube():
    p = sign_patterns(3, 0, 8)
    assert len({tuple(r) for r in p}) == 8
    vals = enumerate_signs(4, lambda e: e.sum(axis=1))
    assert vals.size == 16 and vals.mean() == 0


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 12))
def test_bernoulli_mc_matches_enumeration(seed, d):
    T = PointSet(np.random.default_rng(seed).normal(size=(7, d)))
    model = BernoulliCanonical(T)
    ex = estimate_sup(model, "absolute", 20_000, seed, exact=True)
    mc = estimate_sup(model, "absolute", 20_000, seed, exact=False)
    assert ex.exact and ex.stderr == 0
    assert abs(mc.mean - ex.mean) <= 4 * mc.stderr + 1e-12


def test_product_collapses_to_canonical():
    T = PointSet(np.random.default_rng(1).normal(size=(5, 4)))
    U = PointSet(np.ones((1, 4)))
    a = estimate_product_sup(ProductGaussian(U, T), 8192, 5, mode="absolute")
    b = estimate_sup(GaussianCanonical(T), "absolute", 8192, 5)
    assert a.mean == pytest.approx(b.mean, rel=1e-12)


def test_product_bernoulli_exact():
    U = PointSet([[1.0, 0.0], [0.0, 1.0]])
    T = PointSet([[1.0, 2.0]])
    # sup over u = max(|eps_1|, 2 |eps_2|) = 2
    est = estimate_product_sup(ProductBernoulli(U, T), 100, 0, mode="absolute")
    assert est.exact and est.mean == 2.0


def test_character_weights_unimodular_and_trivial_group():
    U = character_weights(16, [1, 3, 5])
    assert len(U) == 16 and np.allclose(np.abs(U.array), 1)
    assert len(character_weights(1, [4, 5])) == 1
    T = PointSet(np.random.default_rng(2).normal(size=(4, 3)))
    a = estimate_sup(CharacterBernoulli(T, 1, (0, 0, 0)), "absolute", 100, 0)
    b = estimate_sup(BernoulliCanonical(T), "absolute", 100, 0)
    assert a.mean == pytest.approx(b.mean)


def test_tail_compare_single_weight_is_identity():
    vecs = [np.array([1.0, 0.0]), np.array([0.0, 2.0]), np.array([1.0, 1.0])]
    tab = tail_compare(PointSet(np.ones((1, 3))), vecs, [0.5, 1.0, 2.0], 2000, 0)
    assert np.array_equal(tab.p_sup, tab.p_plain)
    assert tab.K == pytest.approx(1.0)


def test_tail_compare_contraction():
    vecs = list(np.random.default_rng(6).normal(size=(5, 3)))
    U = PointSet(np.random.default_rng(7).uniform(-1, 1, size=(6, 5)))
    tab = tail_compare(U, vecs, [0.5, 1.0, 2.0, 3.0], 4000, 1)
    assert tab.exact and np.isfinite(tab.K) and tab.K > 0
    assert np.all(tab.se_sup >= 0) and tab.samples == 32


def test_wilson_stderr_positive_at_extremes():
    se = wilson_stderr(np.array([0.0, 0.5, 1.0]), 100)
    assert np.all(se > 0) and se[1] == pytest.approx(0.05, rel=0.02)

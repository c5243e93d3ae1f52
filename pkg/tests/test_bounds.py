import math

import numpy as np
import pytest

from chainkit.bounds import (
    BERNOULLI_FACTOR,
    AdmissibilityError,
    DecompositionPair,
    audit_admissibility,
    corollary1_bound,
    corollary2_bound,
    corollary3_bound,
    decomposition_min_form,
    decomposition_report,
    default_family,
    diagonal_witnesses,
    ellipsoid_toy,
    entropy_bound_report,
    evaluate_decomposition,
    exact_bernoulli_quantile,
    greedy_l1_decomposition,
    product_functionals,
    remark1_bound,
    remark2_bound,
    theorem2_experiment,
    theorem5_bound,
    verify_theorem3,
    verify_theorem4,
)
from chainkit.core import PointSet, StructuralError, UsageError
from chainkit.mc import BernoulliCanonical, GaussianCanonical
from chainkit.metrics import canonical_distance, scaled_canonical_family, unit_gaussian_quantile
from chainkit.partition import gamma2_upper, gamma_functional, partition_from_entropy


def gpoints(seed, k=12, d=10):
    return PointSet(np.random.default_rng(seed).normal(size=(k, d)) / math.sqrt(d))


def test_theorem3_singleton():
    r = verify_theorem3(GaussianCanonical(PointSet([[1.0, 2.0]])), samples=100, seed=0)
    assert r.bound == 0 and r.estimate == 0 and r.passed


def test_theorem3_two_points_closed_form():
    delta = 1.7
    T = PointSet([[0.0], [delta]])
    r = verify_theorem3(GaussianCanonical(T), tau=2, samples=200_000, seed=1)
    assert r.bound >= 4 * unit_gaussian_quantile(2) * delta
    assert abs(r.estimate - delta * math.sqrt(2 / math.pi)) <= 4 * r.stderr
    assert r.passed


def test_theorem3_rejects_small_tau_and_bad_family():
    T = gpoints(0, 6, 4)
    with pytest.raises(UsageError):
        verify_theorem3(GaussianCanonical(T), tau=1)
    weak = scaled_canonical_family(T, 0.3)
    with pytest.raises(AdmissibilityError) as exc:
        verify_theorem3(GaussianCanonical(T), weak, tau=2, samples=100)
    assert exc.value.violations and "(s=" in str(exc.value)


def test_bernoulli_family_dominates_exact_quantile():
    T = gpoints(3, 6, 8)
    model = BernoulliCanonical(T)
    assert audit_admissibility(model, default_family(model), 6) == []
    d = canonical_distance(T).entries
    q = exact_bernoulli_quantile(T, 3)
    assert np.all(q <= BERNOULLI_FACTOR * unit_gaussian_quantile(3) * d + 1e-12)


def test_bernoulli_theorem3_exact_enumeration():
    r = verify_theorem3(BernoulliCanonical(gpoints(4, 8, 10)), tau=2, samples=1000, seed=0)
    assert r.extra["exact"] and r.stderr == 0 and r.passed


def test_entropy_bound_chain():
    r = entropy_bound_report(GaussianCanonical(gpoints(5)), tau=3, samples=20_000, seed=2)
    assert r.passed and r.extra["chain_ok"]
    with pytest.raises(UsageError):
        entropy_bound_report(GaussianCanonical(gpoints(5)), tau=2)


def test_theorem4_two_by_two_hand_values():
    u, t = np.array([1.0, 2.0]), np.array([0.5, -1.0])
    U = PointSet([[0.0, 0.0], u])
    T = PointSet([[0.0, 0.0], t])
    tau = 4
    r = verify_theorem4(U, T, tau=tau, samples=100_000, seed=3)
    a = unit_gaussian_quantile
    nut = float(np.linalg.norm(u * t))
    # T tree: {T}, {T}, singletons; U side: one cover center at level 0, then singletons
    gamma = (a(tau) + a(tau + 1)) * nut
    ent = a(tau) * nut
    assert r.extra["gamma_U"] == pytest.approx(gamma, rel=1e-12, abs=1e-12)
    assert r.extra["entropy_T"] == pytest.approx(ent, rel=1e-12, abs=1e-12)
    assert r.bound == pytest.approx(24 * (gamma + ent), rel=1e-12)
    # the only nonzero value is X(u, t) ~ N(0, ||u t||^2)
    assert abs(r.estimate - nut * math.sqrt(2 / math.pi)) <= 4 * r.stderr


def test_theorem4_product_collapse():
    T = gpoints(6, 8, 5)
    U = PointSet(np.ones((1, 5)))
    pf = product_functionals(U, T, "gaussian", 4)
    fam = default_family(GaussianCanonical(T))
    tree = partition_from_entropy(T, fam, 5)
    assert pf.gamma_U == pytest.approx(gamma_functional(tree, fam, 4))
    assert pf.entropy_T == 0


def test_theorem4_tau_and_kind():
    U = T = gpoints(7, 3, 3)
    with pytest.raises(UsageError):
        verify_theorem4(U, T, tau=3)
    with pytest.raises(UsageError):
        verify_theorem4(U, T, kind="cauchy")
    r = verify_theorem4(U, T, kind="bernoulli", samples=100, seed=0)
    assert r.passed


def test_corollary1_trivial_and_collapse():
    z = corollary1_bound(PointSet(np.ones((1, 3))), PointSet(np.zeros((1, 3))), samples=200, seed=0)
    assert z.bound == 0 and z.estimate == 0
    T = gpoints(8, 6, 4)
    r = corollary1_bound(PointSet(np.ones((1, 4))), T, samples=5000, seed=1)
    assert r.bound == pytest.approx(gamma2_upper(T))
    assert r.passed and r.extra["rigorous_bound"] >= r.estimate


def test_ellipsoid_toy_paths_agree():
    r = np.random.default_rng(9)
    x, y = r.uniform(0.2, 1, 8), r.uniform(0.2, 1, 8)
    p = ellipsoid_toy(x, y, 20_000, 4)
    assert p.max_abs_diff <= 1e-12 and p.agree()


def test_corollary1_monotone_parts_under_enlargement():
    # the left side and sup ||u||_inf only grow with the sets
    r = np.random.default_rng(11)
    U = PointSet(r.normal(size=(4, 3)))
    T = PointSet(r.normal(size=(5, 3)))
    small = corollary1_bound(U.subset([0, 1]), T.subset([0, 1, 2]), samples=4096, seed=5)
    big = corollary1_bound(U, T, samples=4096, seed=5)
    assert big.estimate >= small.estimate and big.extra["uinf"] >= small.extra["uinf"]


def test_constructive_gamma2_is_not_monotone():
    # recorded counterexample: adding (1, 7) shrinks the entropy-tree value
    A = np.array([[7.0, 8.0], [4.0, 5.0], [5.0, 9.0], [3.0, 7.0], [6.0, 4.0], [1.0, 7.0]])
    assert gamma2_upper(PointSet(A[:5])) > gamma2_upper(PointSet(A)) + 1.0


def test_remark1_zero_and_half_normal():
    T = PointSet([[0.0, 0.0], [1.0, 0.0]])
    r0 = remark1_bound(np.zeros(2), T, 1000, 0)
    assert r0.bound == 0 and r0.estimate == 0
    r = remark1_bound(np.array([1.0, 0.0]), T, 100_000, 1)
    h = math.sqrt(2 / math.pi)
    assert abs(r.estimate - h) <= 4 * r.stderr
    assert abs(r.bound - (r.extra["g_T"] + 1.0)) < 1e-12
    assert abs(r.extra["g_T"] - h) <= 4 * r.extra["g_T_stderr"]


def test_remark1_grid_below_continuum():
    r = np.random.default_rng(2)
    x = r.uniform(0.1, 1, 6)
    T = PointSet(np.vstack([np.zeros(6), r.normal(size=(4, 6))]))
    rep = remark1_bound(x, T, 5000, 3)
    assert rep.estimate <= rep.extra["continuum_mean"]
    assert rep.extra["continuum_mean"] <= rep.bound
    with pytest.raises(StructuralError):
        remark1_bound(np.ones(3), T)


def test_remark2_exact_sup():
    r = np.random.default_rng(3)
    x = r.uniform(0.1, 1, 6)
    T = PointSet(r.normal(size=(5, 6)))
    rep = remark2_bound(x, T)
    assert rep.extra["witness_max_dev"] <= 1e-12
    assert rep.estimate == pytest.approx(np.linalg.norm(T.array * x, axis=1).max())


def test_theorem2_trivial_group():
    r = np.random.default_rng(4)
    T = PointSet(r.normal(size=(6, 5)) + 1j * r.normal(size=(6, 5)))
    rep = theorem2_experiment(T, 1, [0] * 5)
    assert rep.extra["exact"] and rep.extra["K"] <= 1 + 3 * rep.extra["relative_stderr"]
    assert rep.estimate == pytest.approx(rep.extra["b_T"])


def test_theorem2_single_coordinate():
    T = PointSet([[2.0 + 0j], [-1.0 + 1j]])
    rep = theorem2_experiment(T, 8, [3])
    # both sides reduce to |t_1|: LHS max |t_1|, RHS max |t_1| + max |t_1|
    top = max(abs(2.0), abs(-1 + 1j))
    assert rep.estimate == pytest.approx(top) and rep.bound == pytest.approx(2 * top)


def test_theorem2_mc_path_has_stderr():
    T = PointSet(np.random.default_rng(5).normal(size=(4, 24)))
    rep = theorem2_experiment(T, 4, list(range(24)), samples=4096, seed=1)
    assert not rep.extra["exact"] and rep.extra["K_stderr"] > 0


def test_decomposition_identity_zero():
    T = PointSet(np.random.default_rng(6).normal(size=(5, 4)))
    a, g = evaluate_decomposition(T, DecompositionPair.identity(T))
    assert a == pytest.approx(T.norms(1).max()) and g == 0
    a, g = evaluate_decomposition(T, DecompositionPair.zero(T))
    assert a == 0 and g == pytest.approx(gamma2_upper(T))


def test_decomposition_l1_ball():
    T = PointSet(np.vstack([np.eye(5), -np.eye(5)]))
    rep = decomposition_report(T, DecompositionPair.identity(T))
    assert rep.bound == pytest.approx(1.0) and rep.estimate == pytest.approx(1.0) and rep.ratio == pytest.approx(1.0)
    m = decomposition_min_form(T)
    assert m.extra["L_measured"] == pytest.approx(1.0)


def test_decomposition_validation():
    T = PointSet([[0.0, 0.0], [1.0, 1.0]])
    with pytest.raises(StructuralError):
        DecompositionPair(T, np.ones((2, 2)))
    with pytest.raises(StructuralError):
        DecompositionPair(T, np.ones((3, 2)))


def test_greedy_decomposition_budget():
    T = PointSet(np.random.default_rng(7).normal(size=(6, 8)))
    dec = greedy_l1_decomposition(T, 1.5)
    assert np.all(np.abs(dec.pi).sum(axis=1) <= 1.5 + 1e-12)
    # pi keeps a prefix of coordinates in decreasing modulus
    for t, p in zip(T.array, dec.pi):
        kept = np.abs(t[p != 0])
        dropped = np.abs(t[p == 0])
        assert kept.size == 0 or dropped.size == 0 or kept.min() >= dropped.max()


def test_theorem5_and_corollaries_run():
    r = np.random.default_rng(8)
    U = PointSet(r.uniform(-1, 1, size=(5, 4)))
    T = PointSet(r.normal(size=(5, 4)))
    rep = theorem5_bound(U, T, samples=1000, seed=0)
    assert rep.bound > 0 and rep.extra["L_measured"] <= 1.0 + 1e-12
    c2 = corollary2_bound(U, T, samples=1000, seed=0)
    c3 = corollary3_bound(U, T, samples=1000, seed=0)
    assert c2.bound > 0 and c3.bound > 0
    with pytest.raises(UsageError):
        corollary3_bound(PointSet(2 * np.ones((1, 4))), T)


def test_diagonal_witnesses_include_origin():
    W = diagonal_witnesses(np.array([1.0, 2.0]))
    assert W.contains_origin and len(W) == 3

"""Composite chaining bounds paired with Monte Carlo or exact left-hand sides.

Displayed numeric constants (4, 16, 24, 32) are asserted; universal
constants without a value are bookkept as 1 and the measured ratio is
reported instead.

Admissible distances. For Gaussian increments the exact quantile
a*_n * sd is used. Rademacher sums are dominated in convex order by
sqrt(pi/2) times the matching Gaussian sum (condition on the signs of the
Gaussians), and (|x|/q - 1)_+ is convex, so sqrt(pi/2) a*_n sd is admissible
for them as well; small instances are also audited against the exactly
enumerated quantile.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .core import BoundReport, IndexedVector, PointSet, StructuralError, UsageError
from .mc import (
    BernoulliCanonical,
    CharacterBernoulli,
    GaussianCanonical,
    ProductBernoulli,
    ProductGaussian,
    SupEstimate,
    enumerate_signs,
    estimate_product_sup,
    estimate_sup,
)
from .metrics import (
    DistanceFamily,
    DistanceMatrix,
    canonical_distance,
    empirical_quantile_distance,
    gaussian_quantile_family,
    minimal_admissible_constant,
    scaled_family,
    unit_gaussian_quantile,
    weighted_distance,
)
from .partition import (
    dudley_sum,
    entropy_numbers,
    entropy_depth,
    gamma2_upper,
    gamma_functional,
    partition_from_entropy,
)
from .vc import shattering_integral

SIGMAS = 3.0
BERNOULLI_FACTOR = math.sqrt(math.pi / 2.0)
ADMISSIBILITY_TOL = 1e-12


class AdmissibilityError(ValueError):
    """The distance family falls below the quantile distance somewhere."""

    def __init__(self, violations):
        self.violations = violations
        head = ", ".join(f"(s={s}, t={t}, n={n})" for s, t, n in violations[:5])
        super().__init__(f"family not admissible at {len(violations)} (s, t, n) triples: {head}")


def _passed(est: float, se: float, bound: float, sigmas: float = SIGMAS) -> bool:
    return est <= bound + sigmas * se


# ----------------------------------------------------------------------------
# admissible families


def default_family(model, n_max: int | None = None) -> DistanceFamily:
    """Quantile-based family for a canonical model."""
    T = model.T
    d = canonical_distance(T)
    if isinstance(model, GaussianCanonical):
        return gaussian_quantile_family(T, d, n_max)
    if isinstance(model, BernoulliCanonical):
        return scaled_family(T, d, lambda n: BERNOULLI_FACTOR * unit_gaussian_quantile(n), kind="quantile", n_max=n_max)
    raise UsageError("default family needs a canonical Gaussian or Bernoulli model")


def exact_bernoulli_quantile(T: PointSet, n: int) -> np.ndarray:
    """Quantile distances of t -> sum t_i eps_i from the full sign enumeration."""
    vals = enumerate_signs(T.dim, lambda e: e @ T.array.T)
    k = len(T)
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = empirical_quantile_distance(vals[:, i] - vals[:, j], n)
    return out


def audit_admissibility(model, fam: DistanceFamily, n_max: int, exact_dim: int = 12) -> list:
    """(s, t, n) with q_n(s, t) below the model's quantile distance."""
    T = model.T
    d = canonical_distance(T).entries
    bad = []
    for n in range(n_max + 1):
        if isinstance(model, GaussianCanonical):
            ref = unit_gaussian_quantile(n) * d
        elif isinstance(model, BernoulliCanonical):
            ref = exact_bernoulli_quantile(T, n) if T.dim <= exact_dim else BERNOULLI_FACTOR * unit_gaussian_quantile(n) * d
        else:
            raise UsageError("admissibility audit needs a canonical model")
        q = fam.level(n).entries
        viol = np.argwhere(q < ref * (1 - ADMISSIBILITY_TOL) - ADMISSIBILITY_TOL)
        bad.extend((int(s), int(t), n) for s, t in viol if s < t)
    return bad


# ----------------------------------------------------------------------------
# single-index bounds


def _tree_depth_levels(m: int, tau: int) -> int:
    return entropy_depth(m) + tau + 2


def verify_theorem3(
    model, fam: DistanceFamily | None = None, tau: int = 2, samples: int = 100_000, seed: int = 0, audit: bool = True
) -> BoundReport:
    """E sup_{s,t} |X(t) - X(s)| <= 4 gamma^tau_X(T), tau >= 2.

    gamma^tau is evaluated on the entropy tree built for level shift tau + 1,
    whose level-n cells are controlled in q_{n+tau}.
    """
    if tau < 2:
        raise UsageError(f"tau must be >= 2 (got {tau})")
    T = model.T
    fam = default_family(model) if fam is None else fam
    if audit:
        bad = audit_admissibility(model, fam, _tree_depth_levels(len(T), tau))
        if bad:
            raise AdmissibilityError(bad)
    tree = partition_from_entropy(T, fam, tau + 1)
    gamma = gamma_functional(tree, fam, tau)
    est = estimate_sup(model, "increment", samples, seed)
    bound = 4.0 * gamma
    return BoundReport(
        "theorem3",
        bound,
        est.mean,
        est.stderr,
        tau=tau,
        seed=est.seed,
        samples=est.samples,
        passed=_passed(est.mean, est.stderr, bound),
        extra={"gamma": gamma, "tree_depth": tree.depth, "exact": est.exact},
    )


def entropy_bound_report(
    model, fam: DistanceFamily | None = None, tau: int = 3, samples: int = 100_000, seed: int = 0, audit: bool = True
) -> BoundReport:
    """E sup_{s,t} |X(t) - X(s)| <= 16 sum_n e^tau_n, tau >= 3.

    Also records the intermediate step gamma^{tau-1} <= 4 E^tau on the tau-entropy tree.
    """
    if tau < 3:
        raise UsageError(f"tau must be >= 3 (got {tau})")
    T = model.T
    fam = default_family(model) if fam is None else fam
    if audit:
        bad = audit_admissibility(model, fam, _tree_depth_levels(len(T), tau))
        if bad:
            raise AdmissibilityError(bad)
    depth = entropy_depth(len(T))
    e = entropy_numbers(T, fam, tau, depth)
    ent = float(e.sum())
    tree = partition_from_entropy(T, fam, tau)
    g_prev = gamma_functional(tree, fam, tau - 1)
    est = estimate_sup(model, "increment", samples, seed)
    bound = 16.0 * ent
    return BoundReport(
        "entropy_bound",
        bound,
        est.mean,
        est.stderr,
        tau=tau,
        seed=est.seed,
        samples=est.samples,
        passed=_passed(est.mean, est.stderr, bound),
        extra={"entropy_sum": ent, "entropy": e.tolist(), "gamma_prev": g_prev, "chain_ok": bool(g_prev <= 4 * ent + 1e-12)},
    )


# ----------------------------------------------------------------------------
# product index sets


def product_distance_factor(kind: str):
    if kind == "gaussian":
        return unit_gaussian_quantile
    if kind == "bernoulli":
        return lambda n: BERNOULLI_FACTOR * unit_gaussian_quantile(n)
    raise UsageError(f"model kind must be 'gaussian' or 'bernoulli', got {kind!r}")


def sup_weighted_distance(T: PointSet, U: PointSet) -> DistanceMatrix:
    """max_u ||u (t - s)||_2 over u in U."""
    out = np.zeros((len(T), len(T)))
    for u in U.array:
        np.maximum(out, weighted_distance(T, u).entries, out=out)
    return DistanceMatrix(out)


@dataclass
class ProductFunctionals:
    gamma_U: float
    entropy_T: float
    entropy_per_t: list
    tree_depth: int


def product_functionals(U: PointSet, T: PointSet, kind: str, tau: int) -> ProductFunctionals:
    """gamma^tau over q_{n,U} on T and sup_t sum_n e^tau_{n,t} over q_{n,t} on U."""
    factor = product_distance_factor(kind)
    famU = scaled_family(T, sup_weighted_distance(T, U), factor)
    tree = partition_from_entropy(T, famU, tau + 1)
    gamma = gamma_functional(tree, famU, tau)
    depth = entropy_depth(len(U))
    per_t = []
    for t in T.array:
        famt = scaled_family(U, weighted_distance(U, t), factor)
        per_t.append(float(entropy_numbers(U, famt, tau, depth).sum()))
    return ProductFunctionals(gamma, max(per_t), per_t, tree.depth)


def _product_model(U: PointSet, T: PointSet, kind: str):
    return ProductGaussian(U, T) if kind == "gaussian" else ProductBernoulli(U, T)


def verify_theorem4(
    U: PointSet, T: PointSet, kind: str = "gaussian", tau: int = 4, samples: int = 100_000, seed: int = 0
) -> BoundReport:
    """E sup_{u,v} sup_{s,t} |X(u,t) - X(v,s)| <= 24 (gamma^tau_{X,U}(T) + E^tau_{X,T}(U)), tau >= 4."""
    if tau < 4:
        raise UsageError(f"tau must be >= 4 (got {tau})")
    pf = product_functionals(U, T, kind, tau)
    est = estimate_product_sup(_product_model(U, T, kind), samples, seed, mode="increment")
    bound = 24.0 * (pf.gamma_U + pf.entropy_T)
    return BoundReport(
        "theorem4",
        bound,
        est.mean,
        est.stderr,
        tau=tau,
        seed=est.seed,
        samples=est.samples,
        passed=_passed(est.mean, est.stderr, bound),
        extra={"gamma_U": pf.gamma_U, "entropy_T": pf.entropy_T, "kind": kind, "exact": est.exact},
    )


def corollary1_bound(U: PointSet, T: PointSet, tau: int = 4, samples: int = 100_000, seed: int = 0) -> BoundReport:
    """sup_u ||u||_inf gamma_2(T) + sup_t E(U, d_t) against the Gaussian product sup.

    The report's bound is the constant-free form; ``extra`` carries the
    rigorous 32 (gamma^tau + E^tau) with exact quantile families and the
    32 C 2^{tau/2} ceiling with the smallest admissible C.
    """
    if tau < 4:
        raise UsageError(f"tau must be >= 4 (got {tau})")
    uinf = float(np.abs(U.array).max())
    g2 = gamma2_upper(T)
    ent = [dudley_sum(U, weighted_distance(U, t)) for t in T.array]
    bound = uinf * g2 + max(ent)
    pf = product_functionals(U, T, "gaussian", tau)
    rigorous = 32.0 * (pf.gamma_U + pf.entropy_T)
    c_min = minimal_admissible_constant(entropy_depth(max(len(U), len(T))) + tau + 2)
    ceiling = 32.0 * c_min * 2.0 ** (tau / 2.0) * bound
    est = estimate_product_sup(ProductGaussian(U, T), samples, seed, mode="increment")
    absolute = estimate_product_sup(ProductGaussian(U, T), samples, seed, mode="absolute")
    return BoundReport(
        "corollary1",
        bound,
        est.mean,
        est.stderr,
        tau=tau,
        seed=seed,
        samples=est.samples,
        passed=_passed(est.mean, est.stderr, rigorous),
        extra={
            "uinf": uinf,
            "gamma2_T": g2,
            "entropy_max": max(ent),
            "rigorous_bound": rigorous,
            "ceiling_bound": ceiling,
            "C_min": c_min,
            "absolute_mean": absolute.mean,
            "absolute_stderr": absolute.stderr,
        },
    )


# ----------------------------------------------------------------------------
# ellipsoids


def diagonal_witnesses(x, with_zero: bool = True) -> PointSet:
    """{x_i e_i} (and 0): the points of the ellipsoid with axes x on its axes."""
    x = np.asarray(x.coords if isinstance(x, IndexedVector) else x, dtype=np.float64)
    pts = np.diag(x)
    if with_zero:
        pts = np.vstack([np.zeros(x.size), pts])
    return PointSet.from_points(pts)


def ellipsoid_grid(x, directions: int = 64, seed: int = 0) -> PointSet:
    """Diagonal witnesses, sign vertices and boundary points x * w / ||w|| of the ellipsoid with axes x."""
    x = np.asarray(x.coords if isinstance(x, IndexedVector) else x, dtype=np.float64)
    d = x.size
    w = rng.normals(seed, 0, (directions, d))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    rows = [np.zeros(d), *np.diag(x), *(x * w)]
    if d <= 10:
        from .mc import sign_patterns

        rows.extend(x * sign_patterns(d, 0, 1 << d) / math.sqrt(d))
    return PointSet.from_points(np.array(rows))


@dataclass
class PairedSup:
    mean_a: float
    se_a: float
    mean_b: float
    se_b: float
    max_abs_diff: float
    samples: int

    def agree(self, sigmas: float = SIGMAS) -> bool:
        return abs(self.mean_a - self.mean_b) <= sigmas * math.hypot(self.se_a, self.se_b)


def ellipsoid_toy(x, y, samples: int = 20_000, seed: int = 0) -> PairedSup:
    """Product sup over diagonal witnesses against max_i |x_i y_i g_i| on the same draws."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    U = diagonal_witnesses(x)
    T = diagonal_witnesses(y)
    W = (U.array[:, None, :] * T.array[None, :, :]).reshape(-1, x.size)
    xy = np.abs(x * y)

    def both(g: np.ndarray) -> np.ndarray:
        a = np.abs(g @ W.T).max(axis=1)
        b = (np.abs(g) * xy).max(axis=1)
        return np.stack([a, b], axis=1).ravel()

    v = rng.sample_functional("gaussian", x.size, both, samples, seed).reshape(-1, 2)
    n = v.shape[0]
    sd = v.std(axis=0, ddof=1) / math.sqrt(n)
    return PairedSup(float(v[:, 0].mean()), float(sd[0]), float(v[:, 1].mean()), float(sd[1]), float(np.abs(v[:, 0] - v[:, 1]).max()), n)


def remark1_bound(x, T: PointSet, samples: int = 20_000, seed: int = 0, directions: int = 64) -> BoundReport:
    """||x||_inf g(T) + Delta(T) ||x||_2 (constant 1) against E sup over the ellipsoid grid.

    ``extra["continuum_mean"]`` holds E max_t ||x t g||_2, the exact sup over
    the whole ellipsoid, which dominates the grid value draw by draw.
    """
    x = np.asarray(x.coords if isinstance(x, IndexedVector) else x, dtype=np.float64)
    if x.size != T.dim:
        raise StructuralError("x and T must have equal dimension")
    U = ellipsoid_grid(x, directions, seed)
    W = (U.array[:, None, :] * T.array[None, :, :]).reshape(-1, x.size)
    Ta = T.array

    def vals(g: np.ndarray) -> np.ndarray:
        grid = np.abs(g @ W.T).max(axis=1)
        cont = np.linalg.norm(g[:, None, :] * (x * Ta)[None, :, :], axis=2).max(axis=1)
        gT = np.abs(g @ Ta.T).max(axis=1)
        return np.stack([grid, cont, gT], axis=1).ravel()

    v = rng.sample_functional("gaussian", x.size, vals, samples, seed).reshape(-1, 3)
    n = v.shape[0]
    m = v.mean(axis=0)
    se = v.std(axis=0, ddof=1) / math.sqrt(n)
    delta = canonical_distance(T).diameter()
    bound = float(np.abs(x).max()) * float(m[2]) + delta * float(np.linalg.norm(x))
    return BoundReport(
        "remark1",
        bound,
        float(m[0]),
        float(se[0]),
        seed=seed,
        samples=n,
        passed=None,
        extra={
            "continuum_mean": float(m[1]),
            "continuum_stderr": float(se[1]),
            "g_T": float(m[2]),
            "g_T_stderr": float(se[2]),
            "delta_T": delta,
            "grid_size": len(U),
            "continuum_ratio": float(m[1]) / bound if bound > 0 else 0.0,
        },
    )


def remark2_bound(x, T: PointSet, samples: int = 20_000, seed: int = 0) -> BoundReport:
    """Bernoulli product over the ellipsoid with axes x: the left side is exactly
    max_t ||t x||_2 (each draw attains it at u* = x^2 t eps / ||x t||), reported
    against ||x||_2 b(T)."""
    x = np.asarray(x.coords if isinstance(x, IndexedVector) else x, dtype=np.float64)
    Ta = T.array
    exact = float(np.linalg.norm(Ta * x[None, :], axis=1).max())

    def witness(eps: np.ndarray) -> np.ndarray:
        # per draw and t, the maximizer over the ellipsoid
        y = x[None, None, :] * Ta[None, :, :] * eps[:, None, :]
        nrm = np.linalg.norm(y, axis=2, keepdims=True)
        u = np.divide(x[None, None, :] * y, nrm, out=np.zeros_like(y), where=nrm > 0)
        val = np.abs(np.sum(u * Ta[None, :, :] * eps[:, None, :], axis=2)).max(axis=1)
        bt = np.abs(eps @ Ta.T).max(axis=1)
        return np.stack([val, bt], axis=1).ravel()

    d = x.size
    if d <= 16:
        v = enumerate_signs(d, witness, block=1 << 12).reshape(-1, 2)
        se_b = 0.0
    else:
        v = rng.sample_functional("bernoulli", d, witness, samples, seed).reshape(-1, 2)
        se_b = float(v[:, 1].std(ddof=1) / math.sqrt(v.shape[0]))
    b_T = float(v[:, 1].mean())
    bound = float(np.linalg.norm(x)) * b_T
    return BoundReport(
        "remark2",
        bound,
        exact,
        0.0,
        seed=None if d <= 16 else seed,
        samples=v.shape[0],
        passed=None,
        extra={"witness_max_dev": float(np.abs(v[:, 0] - exact).max()), "b_T": b_T, "b_T_stderr": se_b},
    )


# ----------------------------------------------------------------------------
# characters


def theorem2_experiment(T: PointSet, m: int, freqs, samples: int = 20_000, seed: int = 0) -> BoundReport:
    """K = E sup_h sup_t |sum t_i chi_i(h) eps_i| / (b(T) + max_t E sup_h |sum t_i chi_i(h) eps_i|).

    All three expectations share the same sign draws.
    """
    freqs = tuple(int(k) for k in freqs)
    model = CharacterBernoulli(T, m, freqs)
    W = model.vectors()
    Ta = T.array.astype(np.complex128)
    k = len(T)
    G = len(model.U)

    def vals(eps: np.ndarray) -> np.ndarray:
        v = np.abs(eps @ W.T).reshape(eps.shape[0], G, k)
        lhs = v.max(axis=(1, 2))
        per_t = v.max(axis=1)  # (n, |T|)
        bt = np.abs(eps @ Ta.T).max(axis=1)
        return np.concatenate([lhs[:, None], bt[:, None], per_t], axis=1).ravel()

    d = T.dim
    exact = d <= 20 and (1 << d) <= 4 * samples
    if exact:
        v = enumerate_signs(d, vals, block=1 << 10).reshape(-1, k + 2)
    else:
        v = rng.sample_functional("bernoulli", d, vals, samples, seed).reshape(-1, k + 2)
    n = v.shape[0]
    means = v.mean(axis=0)
    j = int(np.argmax(means[2:]))
    lhs, bt, best_t = float(means[0]), float(means[1]), float(means[2 + j])
    rhs = bt + best_t
    if rhs == 0:
        raise UsageError("degenerate right side: b(T) = 0")
    K = lhs / rhs
    if exact:
        se = 0.0
    else:
        a = v[:, 0]
        b = v[:, 1] + v[:, 2 + j]
        c = np.cov(np.stack([a, b]), ddof=1) / n
        se = math.sqrt(max(0.0, c[0, 0] / rhs**2 - 2 * lhs * c[0, 1] / rhs**3 + lhs**2 * c[1, 1] / rhs**4))
    return BoundReport(
        "theorem2",
        rhs,
        lhs,
        se * rhs,
        seed=None if exact else seed,
        samples=n,
        passed=None,
        extra={"K": K, "K_stderr": se, "relative_stderr": se / K if K > 0 else 0.0, "b_T": bt, "single_t_max": best_t, "group_order": m, "exact": exact},
    )


# ----------------------------------------------------------------------------
# decompositions


@dataclass
class DecompositionPair:
    """pi(t) for every t in T; T_1 = {pi(t)}, T_2 = {t - pi(t)}."""

    T: PointSet
    pi: np.ndarray

    def __post_init__(self):
        self.pi = np.asarray(self.pi, dtype=self.T.array.dtype)
        if self.pi.shape != self.T.array.shape:
            raise StructuralError("pi must assign one vector per point of T")
        o = self.T.origin_index()
        if o is not None and np.any(self.pi[o] != 0):
            raise StructuralError("pi(0) must be 0")

    @classmethod
    def identity(cls, T: PointSet) -> DecompositionPair:
        return cls(T, T.array.copy())

    @classmethod
    def zero(cls, T: PointSet) -> DecompositionPair:
        return cls(T, np.zeros_like(T.array))

    @property
    def T1(self) -> PointSet:
        return PointSet.from_points(self.pi)

    @property
    def T2(self) -> PointSet:
        return PointSet.from_points(self.T.array - self.pi)


def evaluate_decomposition(T: PointSet, dec: DecompositionPair) -> tuple[float, float]:
    """(sup_{t in T_1} ||t||_1, gamma_2 upper bound of T_2)."""
    if dec.T != T:
        raise StructuralError("decomposition belongs to another point set")
    return float(dec.T1.norms(1).max()), float(gamma2_upper(dec.T2))


def greedy_l1_decomposition(T: PointSet, budget: float) -> DecompositionPair:
    """pi(t) keeps the largest |t_i| while their l1 mass stays within ``budget``."""
    pi = np.zeros_like(T.array)
    for r, t in enumerate(T.array):
        order = np.argsort(-np.abs(t), kind="stable")
        used = 0.0
        for i in order:
            a = abs(t[i])
            if a == 0 or used + a > budget:
                break
            pi[r, i] = t[i]
            used += a
    return DecompositionPair(T, pi)


def decomposition_report(T: PointSet, dec: DecompositionPair, samples: int = 20_000, seed: int = 0) -> BoundReport:
    """sup ||pi(t)||_1 + gamma_2(T_2) (constant 1) against b(T)."""
    a, g = evaluate_decomposition(T, dec)
    est = estimate_sup(BernoulliCanonical(T), "absolute", samples, seed)
    return BoundReport(
        "decomposition",
        a + g,
        est.mean,
        est.stderr,
        seed=est.seed,
        samples=est.samples,
        passed=None,
        extra={"l1_part": a, "gamma2_part": g, "exact": est.exact},
    )


def b_estimate(T: PointSet, samples: int = 20_000, seed: int = 0) -> SupEstimate:
    return estimate_sup(BernoulliCanonical(T), "absolute", samples, seed)


def theorem5_bound(U: PointSet, T: PointSet, dec: DecompositionPair | None = None, lam: float = 1.0, samples: int = 20_000, seed: int = 0) -> BoundReport:
    """sup_u ||u||_inf b(T) + sup_t E(U, d_{t - pi(t)}) (constant 1) against the Bernoulli product sup.

    Without ``dec`` the greedy l1 map with budget lam * b(T) is used.
    """
    bT = b_estimate(T, samples, seed)
    dec = greedy_l1_decomposition(T, lam * bT.mean) if dec is None else dec
    uinf = float(np.abs(U.array).max())
    resid = T.array - dec.pi
    ent = max(dudley_sum(U, weighted_distance(U, r)) for r in resid)
    bound = uinf * bT.mean + ent
    est = estimate_product_sup(ProductBernoulli(U, T), samples, seed, mode="absolute")
    l1 = float(np.abs(dec.pi).sum(axis=1).max())
    return BoundReport(
        "theorem5",
        bound,
        est.mean,
        est.stderr,
        seed=seed,
        samples=est.samples,
        passed=None,
        extra={"b_T": bT.mean, "entropy_max": ent, "pi_l1_max": l1, "L_measured": l1 / bT.mean if bT.mean > 0 else 0.0},
    )


def corollary2_bound(U: PointSet, T: PointSet, eps_grid=None, samples: int = 20_000, seed: int = 0) -> BoundReport:
    """g(T) + Delta(T) int_0^1 sqrt(vc(U, eps) log(2/eps)) d eps (constant 1), for U inside [-1, 1]^I."""
    if np.abs(U.array).max() > 1:
        raise UsageError("U must lie in [-1, 1]^I")
    grid = np.linspace(0.05, 1.0, 20) if eps_grid is None else eps_grid
    integral = shattering_integral(U, grid)
    g = estimate_sup(GaussianCanonical(T), "absolute", samples, seed)
    delta = canonical_distance(T).diameter()
    bound = g.mean + delta * integral
    est = estimate_product_sup(ProductGaussian(U, T), samples, seed, mode="absolute")
    return BoundReport("corollary2", bound, est.mean, est.stderr, seed=seed, samples=est.samples, passed=None, extra={"g_T": g.mean, "delta_T": delta, "shatter_integral": integral})


def corollary3_bound(U: PointSet, T: PointSet, eps_grid=None, samples: int = 20_000, seed: int = 0) -> BoundReport:
    """b(T) int_0^1 sqrt(vc(U, eps) log(2/eps)) d eps (constant 1) against the Bernoulli product sup."""
    if np.abs(U.array).max() > 1:
        raise UsageError("U must lie in [-1, 1]^I")
    grid = np.linspace(0.05, 1.0, 20) if eps_grid is None else eps_grid
    integral = shattering_integral(U, grid)
    bT = b_estimate(T, samples, seed)
    est = estimate_product_sup(ProductBernoulli(U, T), samples, seed, mode="absolute")
    return BoundReport("corollary3", bT.mean * integral, est.mean, est.stderr, seed=seed, samples=est.samples, passed=None, extra={"b_T": bT.mean, "shatter_integral": integral})


def decomposition_min_form(T: PointSet, samples: int = 20_000, seed: int = 0) -> BoundReport:
    """min(sup ||t||_1, gamma_2(T)) from the identity and zero maps against b(T);
    the measured L = b(T) / min-form is recorded."""
    a, _ = evaluate_decomposition(T, DecompositionPair.identity(T))
    _, g = evaluate_decomposition(T, DecompositionPair.zero(T))
    m = min(a, g)
    est = b_estimate(T, samples, seed)
    return BoundReport(
        "decomposition_min",
        m,
        est.mean,
        est.stderr,
        seed=est.seed,
        samples=est.samples,
        passed=None,
        extra={"l1_max": a, "gamma2": g, "L_measured": est.mean / m if m > 0 else 0.0},
    )

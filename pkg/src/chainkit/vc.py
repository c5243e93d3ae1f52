"""VC dimension, eps-shattering dimension and the maximal-inequality ratio.

A coordinate set J is eps-shattered by U when some level vector v admits, for
every A subset of J, a point u in U with u_i <= v_i on A and u_i >= v_i + eps
on J minus A. The level v_i may always be moved to the largest u_i among the
witnesses below it, so it suffices to search v over coordinate values of U.
The search fixes one coordinate at a time: after fixing r levels the points
fall into 2^r labeled groups, each of which must stay nonempty, and the next
level must lie in the intersection over groups of [min u_i, max u_i - eps].
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .core import BoundReport, PointSet, SetFamily, UsageError
from .mc import EXACT_DIM_MAX, enumerate_signs
from . import rng

VC_GROUND_MAX = 24
VC_CAP_MAX = 12
SHATTER_POINTS_MAX = 4096
SHATTER_DIM_MAX = 16
SHATTER_CAP_MAX = 4


# ----------------------------------------------------------------------------
# VC dimension of set families


def _shattered(members: np.ndarray, mask: int, k: int) -> bool:
    return np.unique(members & mask).size == (1 << k)


def vc_dimension(fam: SetFamily, cap: int = VC_CAP_MAX) -> int:
    """Largest |B| <= cap with every subset of B cut out by some member."""
    if fam.ground_size > VC_GROUND_MAX:
        raise UsageError(f"vc_dimension limited to ground size {VC_GROUND_MAX}")
    if cap > VC_CAP_MAX:
        raise UsageError(f"vc_dimension cap limited to {VC_CAP_MAX}")
    if len(fam) == 0:
        return -1
    members = np.array(fam.members, dtype=np.int64)
    # shattering is hereditary, so level k only extends shattered (k-1)-sets
    level = {0}
    best = 0
    for k in range(1, min(cap, fam.ground_size) + 1):
        if len(fam) < (1 << k):
            break
        nxt = set()
        for base in level:
            top = base.bit_length()
            for i in range(top, fam.ground_size):
                mask = base | (1 << i)
                if mask in nxt:
                    continue
                # all (k-1)-subsets must already be shattered
                if k > 1 and any((mask & ~(1 << j)) not in level for j in range(fam.ground_size) if mask >> j & 1):
                    continue
                if _shattered(members, mask, k):
                    nxt.add(mask)
        if not nxt:
            break
        level = nxt
        best = k
    return best


# ----------------------------------------------------------------------------
# eps-shattering


@dataclass
class ShatterWitness:
    J: tuple
    v: dict
    witnesses: dict = field(default_factory=dict)

    def check(self, U: PointSet, eps: float) -> bool:
        a = U.array
        for A in itertools.product((True, False), repeat=len(self.J)):
            u = a[self.witnesses[A]]
            for inA, i in zip(A, self.J):
                if inA and not u[i] <= self.v[i]:
                    return False
                if not inA and not u[i] >= self.v[i] + eps:
                    return False
        return True

    def to_dict(self) -> dict:
        return {
            "J": list(self.J),
            "v": {str(i): float(x) for i, x in self.v.items()},
            "witnesses": [{"A": [i for inA, i in zip(A, self.J) if inA], "u": int(w)} for A, w in self.witnesses.items()],
        }


def _search(a: np.ndarray, J: tuple, eps: float):
    """Levels and witnesses shattering J, or None."""
    groups0 = [((), np.arange(a.shape[0]))]

    def rec(r: int, groups, v):
        if r == len(J):
            return v, groups
        i = J[r]
        lo = max(float(a[g, i].min()) for _, g in groups)
        hi = min(float(a[g, i].max()) for _, g in groups) - eps
        if lo > hi:
            return None
        col = a[:, i]
        cands = np.unique(col[(col >= lo) & (col <= hi)])
        for c in cands:
            nxt = []
            ok = True
            for lab, g in groups:
                below = g[a[g, i] <= c]
                above = g[a[g, i] >= c + eps]
                if below.size == 0 or above.size == 0:
                    ok = False
                    break
                nxt.append((lab + (True,), below))
                nxt.append((lab + (False,), above))
            if ok:
                out = rec(r + 1, nxt, v + [float(c)])
                if out is not None:
                    return out
        return None

    out = rec(0, groups0, [])
    if out is None:
        return None
    v, groups = out
    return ShatterWitness(J, dict(zip(J, v)), {lab: int(g[0]) for lab, g in groups})


def _check_shatter_caps(U: PointSet, cap: int):
    if len(U) > SHATTER_POINTS_MAX:
        raise UsageError(f"shattering limited to |U| <= {SHATTER_POINTS_MAX}")
    if U.dim > SHATTER_DIM_MAX:
        raise UsageError(f"shattering limited to dim <= {SHATTER_DIM_MAX}")
    if cap > SHATTER_CAP_MAX:
        raise UsageError(f"shattering cap limited to {SHATTER_CAP_MAX}")
    if U.is_complex:
        raise UsageError("shattering needs real coordinates")


def shattering_dimension(U: PointSet, eps: float, cap: int = SHATTER_CAP_MAX, witness: bool = False):
    """Largest |J| <= cap that is eps-shattered by U (with a witness if asked)."""
    _check_shatter_caps(U, cap)
    if eps < 0:
        raise UsageError("eps must be >= 0")
    a = U.array
    best, best_w = 0, None
    level = [()]
    for k in range(1, min(cap, U.dim) + 1):
        # with eps > 0 the 2^k witnesses are distinct points
        if eps > 0 and len(U) < (1 << k):
            break
        prev = set(level)
        nxt = []
        for J in itertools.combinations(range(U.dim), k):
            if k > 1 and any(J[:j] + J[j + 1 :] not in prev for j in range(k)):
                continue
            w = _search(a, J, eps)
            if w is not None:
                nxt.append(J)
                if best_w is None or len(best_w.J) < k:
                    best_w = w
        if not nxt:
            break
        level = nxt
        best = k
    return (best, best_w) if witness else best


def coordinate_gap(U: PointSet) -> float:
    """Smallest positive difference between values of one coordinate."""
    gaps = []
    for col in U.array.T:
        d = np.diff(np.unique(col))
        if d.size:
            gaps.append(float(d.min()))
    return min(gaps) if gaps else math.inf


def vc_curve(U: PointSet, eps_grid, cap: int = SHATTER_CAP_MAX) -> list[tuple[float, int]]:
    return [(float(e), shattering_dimension(U, float(e), cap)) for e in eps_grid]


def vc_curve_csv(curve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eps", "vc"])
    for e, v in curve:
        w.writerow([repr(e), v])
    return buf.getvalue()


def log_integral_primitive(eps: float) -> float:
    """int_0^eps sqrt(log(2/x)) dx for 0 <= eps <= 2."""
    if eps <= 0:
        return 0.0
    return float(2.0 * special.gamma(1.5) * special.gammaincc(1.5, math.log(2.0 / eps)))


def shattering_integral(U: PointSet, eps_grid, cap: int = SHATTER_CAP_MAX, return_curve: bool = False):
    """Upper sum for int_0^1 sqrt(vc(U, eps) log(2/eps)) d eps.

    vc is nonincreasing in eps, so each grid piece takes its left-endpoint
    value. On (0, eps_0] the dimension is constant below the smallest
    coordinate gap, so that piece uses vc at min(gap, eps_0) and is exact.
    """
    grid = np.asarray(eps_grid, dtype=np.float64)
    if grid.size == 0 or np.any(grid <= 0) or np.any(grid > 1) or np.any(np.diff(grid) <= 0):
        raise UsageError("eps_grid must be strictly increasing inside (0, 1]")
    knots = list(grid) + ([1.0] if grid[-1] < 1.0 else [])
    e0 = float(grid[0])
    first = shattering_dimension(U, min(coordinate_gap(U), e0), cap)
    total = math.sqrt(first) * log_integral_primitive(e0)
    curve = []
    for a, b in zip(knots[:-1], knots[1:]):
        v = shattering_dimension(U, float(a), cap)
        curve.append((float(a), v))
        total += math.sqrt(v) * (log_integral_primitive(b) - log_integral_primitive(a))
    return (total, curve) if return_curve else total


# ----------------------------------------------------------------------------
# unit-ball discretizations


def circle_points(k: int = 64) -> PointSet:
    ang = 2 * np.pi * np.arange(k) / k
    pts = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    # snap exact axis and diagonal values so symmetric points match
    pts[np.abs(pts) < 1e-15] = 0.0
    return PointSet.from_points(pts)


def sphere_directions(dim: int, radius: int = 2) -> PointSet:
    """Normalized nonzero integer vectors of {-radius..radius}^dim."""
    g = np.array(list(itertools.product(range(-radius, radius + 1), repeat=dim)), dtype=np.float64)
    g = g[np.any(g != 0, axis=1)]
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return PointSet.from_points(np.round(g, 15))


def unit_ball_vc_expected(eps: float, dim: int) -> int:
    """k - 1 for eps in [2/sqrt(k), 2/sqrt(k-1)), capped at dim; 0 for eps >= 2."""
    if eps >= 2:
        return 0
    k = 2
    while 2 / math.sqrt(k) > eps:
        k += 1
    return min(k - 1, dim)


# ----------------------------------------------------------------------------
# maximal inequality


def _power_set_support(fam: SetFamily) -> int | None:
    """Mask S when fam is exactly the power set of S, else None."""
    S = 0
    for m in fam.members:
        S |= m
    k = bin(S).count("1")
    if len(fam) != (1 << k):
        return None
    return S


def family_sup_values(fam: SetFamily, T: PointSet, eps: np.ndarray) -> np.ndarray:
    """Per draw, sup_{A in fam} sup_{t in T} |sum_{i in A} t_i eps_i|."""
    y = eps[:, None, :] * T.array[None, :, :]
    S = _power_set_support(fam)
    if S is not None:
        sel = np.array([(S >> i) & 1 for i in range(fam.ground_size)], dtype=bool)
        ys = y[:, :, sel]
        # over all subsets, the sup of |sum| takes all positive or all negative parts
        best = np.maximum(np.clip(ys, 0, None).sum(axis=2), np.clip(-ys, 0, None).sum(axis=2))
        return best.max(axis=1)
    ind = fam.indicators()
    # (n, |T|, |fam|)
    vals = np.abs(np.einsum("nti,ai->nta", y, ind))
    return vals.reshape(vals.shape[0], -1).max(axis=1)


def maximal_inequality_experiment(
    fam: SetFamily,
    T: PointSet,
    samples: int = 20_000,
    seed: int = 0,
    exact: bool | None = None,
    band: float = 10.0,
) -> BoundReport:
    """Ratio K_emp = E sup_A sup_t |sum_{A} t_i eps_i| / E sup_t |sum t_i eps_i|.

    The report's bound is sqrt(vc) * b(T); ``passed`` records K_emp <= band * sqrt(vc).
    """
    if fam.ground_size != T.dim:
        raise UsageError("family ground set must index the coordinates of T")
    d = T.dim
    base = T.array

    def pair(eps: np.ndarray) -> np.ndarray:
        num = family_sup_values(fam, T, eps)
        den = np.abs(eps @ base.T).max(axis=1)
        return np.stack([num, den], axis=1)

    if exact is None:
        exact = d <= EXACT_DIM_MAX and (1 << d) <= 4 * max(samples, 1)
    if exact:
        vals = enumerate_signs(d, pair, block=1 << 12)
    else:
        vals = rng.sample_functional("bernoulli", d, lambda e: pair(e).ravel(), samples, seed).reshape(-1, 2)
    n = vals.shape[0]
    num_m, den_m = float(vals[:, 0].mean()), float(vals[:, 1].mean())
    if den_m == 0:
        raise UsageError("degenerate denominator: b(T) = 0")
    K = num_m / den_m
    if exact:
        se = 0.0
    else:
        # delta method for a ratio of paired means
        c = np.cov(vals.T, ddof=1) / n
        se = math.sqrt(max(0.0, c[0, 0] / den_m**2 - 2 * num_m * c[0, 1] / den_m**3 + num_m**2 * c[1, 1] / den_m**4))
    S = _power_set_support(fam)
    # the power set of S shatters exactly the subsets of S, so no search is needed
    vcd = bin(S).count("1") if S is not None else vc_dimension(fam, cap=min(VC_CAP_MAX, fam.ground_size))
    return BoundReport(
        "maximal_inequality",
        bound=math.sqrt(max(vcd, 0)) * den_m,
        estimate=num_m,
        stderr=se * den_m,
        seed=None if exact else seed,
        samples=n,
        passed=bool(K <= band * math.sqrt(max(vcd, 1))),
        extra={"K_emp": K, "K_stderr": se, "vc": vcd, "sqrt_vc": math.sqrt(max(vcd, 0)), "b_T": den_m, "exact": bool(exact)},
    )

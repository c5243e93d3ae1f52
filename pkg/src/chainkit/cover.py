"""Cube covers of the Euclidean unit ball B_N(0,1), and the ellipsoid entropy sum.

Covers are built from axis-aligned lattice cubes: side h, centers h * k for
integer vectors k, keeping exactly the cubes that meet the closed ball. Three
regimes pick the side:

* low: the single cube [-1, 1]^N;
* middle: side 2t with t = 1/sqrt(m_n). A cube k meets the ball iff
  sum over nonzero k_i of (2|k_i| - 1)^2 <= m_n, an integer budget, so the
  count is exact;
* high: side N^{-1/2} N_n^{-1/N}, counted exactly when small and bounded by
  the volume of B_N(0, 1 + h sqrt N) otherwise.

Certificates compare counts with N_{n+sigma}, in log2 when needed.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import rng
from .core import IndexedVector, UsageError, fits_level, log2_level_cardinality

EXPLICIT_N_MAX = 10
COUNT_N_MAX = 1 << 20
ENUM_LIMIT = 2_000_000
BALL_TOL = 1e-12


class ParameterError(ValueError):
    """No admissible parameter exists for the requested (N, sigma, n)."""


def base_level(N: int) -> int:
    """n_0 >= 1 with 2^{n_0} >= N >= 2^{n_0 - 1}."""
    if N < 2:
        raise UsageError("N must be >= 2")
    return max(1, (N - 1).bit_length())


def middle_range(N: int, sigma: int) -> range:
    n0 = base_level(N)
    return range(-(-n0 // 2) + sigma, n0 + sigma + 1)


# ----------------------------------------------------------------------------
# m_n


def _mlog(m: int, N: int) -> float:
    return m * math.log(math.e * N / m)


@dataclass
class MSequence:
    N: int
    sigma: int
    n: list
    m: list
    capped: list
    lower_ok: list
    upper_ok: list
    floor_ok: list
    ratio_ok: list

    @property
    def ok(self) -> bool:
        return all(self.lower_ok) and all(self.upper_ok) and all(self.floor_ok) and all(self.ratio_ok)

    def as_dict(self) -> dict:
        return {n: m for n, m in zip(self.n, self.m)}


def smallest_m(N: int, sigma: int, n: int) -> int | None:
    """Smallest integer m in [1, N] with 2^{n - sigma} <= m log(eN/m), else None."""
    target = 2.0 ** (n - sigma)
    # m log(eN/m) increases on [1, N], so bisect
    if _mlog(N, N) < target:
        return None
    lo, hi = 1, N
    while lo < hi:
        mid = (lo + hi) // 2
        if _mlog(mid, N) >= target:
            hi = mid
        else:
            lo = mid + 1
    return lo


def m_sequence(N: int, sigma: int) -> MSequence:
    """m_n over the middle regime, with the growth checks recorded per level."""
    if sigma < 1:
        raise UsageError("sigma must be >= 1")
    n0 = base_level(N)
    ns, ms, capped = [], [], []
    for n in middle_range(N, sigma):
        m = smallest_m(N, sigma, n)
        if m is None:
            if n == n0 + sigma:
                # last index: the natural value 2^{n_0} exceeds N; cap it
                m = N
                capped.append(True)
            else:
                raise ParameterError(f"no m in [1, {N}] satisfies 2^(n-sigma) <= m log(eN/m) for N={N}, sigma={sigma}, n={n}")
        else:
            capped.append(False)
        ns.append(n)
        ms.append(m)
    # fails only at a capped level, where no m <= N meets the definition
    lower = [2.0 ** (n - sigma) <= _mlog(m, N) * (1 + 1e-12) for n, m in zip(ns, ms)]
    upper = [c or m == 1 or _mlog(m, N) <= 2.0 ** (n - sigma + 1) * (1 + 1e-12) for n, m, c in zip(ns, ms, capped)]
    floor = [m >= N * 8.0 ** (-(n0 + sigma - n)) * (1 - 1e-12) for n, m in zip(ns, ms)]
    ratio = [ms[i + 1] <= 8 * ms[i] for i in range(len(ms) - 1)]
    return MSequence(N, sigma, ns, ms, capped, lower, upper, floor, ratio)


# ----------------------------------------------------------------------------
# lattice counts


def _gap(k: np.ndarray, h: float) -> np.ndarray:
    """Distance from 0 to [h k - h/2, h k + h/2] per coordinate."""
    return np.maximum(np.abs(k) * h - h / 2.0, 0.0)


def lattice_count(N: int, h: float) -> int | None:
    """Number of side-h lattice cubes meeting the closed unit ball, or None if too many to count."""
    K = int(math.floor(1.0 / h + 0.5 + 1e-12))
    width = 2 * K + 1
    if width ** (N - 1) > ENUM_LIMIT:
        return None
    r = np.arange(-K, K + 1)
    if N == 1:
        return width
    grids = np.meshgrid(*([r] * (N - 1)), indexing="ij")
    s = sum(_gap(g, h) ** 2 for g in grids).ravel()
    rem = 1.0 + BALL_TOL - s
    ok = rem >= 0
    last = np.floor(np.sqrt(rem[ok]) / h + 0.5 + 1e-12).astype(np.int64)
    last = np.minimum(last, K)
    return int(np.sum(2 * last + 1))


def budget_count(N: int, m: int) -> int:
    """#{k in Z^N : sum_{k_i != 0} (2|k_i| - 1)^2 <= m}."""
    costs = []
    j = 1
    while (2 * j - 1) ** 2 <= m:
        costs.append((2 * j - 1) ** 2)
        j += 1
    ways = [0] * (m + 1)
    ways[0] = 1
    for _ in range(N):
        nxt = ways[:]
        for b in range(m + 1):
            if ways[b]:
                for c in costs:
                    if b + c <= m:
                        nxt[b + c] += 2 * ways[b]
        ways = nxt
    return sum(ways)


def log2_ball_volume(N: int, radius: float = 1.0) -> float:
    return (0.5 * N * math.log(math.pi) - special.gammaln(0.5 * N + 1) + N * math.log(radius)) / math.log(2)


# ----------------------------------------------------------------------------
# covers


@dataclass
class CubeCover:
    regime: str
    N: int
    n: int
    sigma: int
    side: float
    count: int | None
    log2_count_bound: float
    certified_log2: int
    count_exact: bool
    m: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def radius(self) -> float:
        """Half side: the l-infinity radius of each cube."""
        return self.side / 2.0

    @property
    def linf_diameter(self) -> float:
        return self.side

    @property
    def l2_diameter_in_ball(self) -> float:
        return min(2.0, self.side * math.sqrt(self.N))

    @property
    def certified(self) -> bool:
        if self.count is not None:
            return fits_level(self.count, self.n + self.sigma)
        return self.log2_count_bound <= self.certified_log2

    def contains_cube(self, k: np.ndarray) -> np.ndarray:
        """Whether lattice cubes k (rows) belong to the cover."""
        k = np.atleast_2d(k)
        if self.regime == "low":
            return np.all(k == 0, axis=1)
        if self.regime == "middle":
            cost = np.where(k != 0, (2 * np.abs(k) - 1) ** 2, 0).sum(axis=1)
            return cost <= self.m
        return (_gap(k, self.side) ** 2).sum(axis=1) <= 1.0 + BALL_TOL

    def locate(self, x: np.ndarray) -> np.ndarray:
        """Lattice index of the cube holding each row of x."""
        if self.regime == "low":
            return np.zeros(x.shape, dtype=np.int64)
        return np.rint(x / self.side).astype(np.int64)

    def centers(self, k: np.ndarray) -> np.ndarray:
        return k * self.side

    def cubes(self) -> list[tuple[np.ndarray, float]]:
        """Explicit (center, radius) list; only for small N and counts."""
        if self.N > EXPLICIT_N_MAX:
            raise UsageError(f"explicit cube lists limited to N <= {EXPLICIT_N_MAX}")
        if self.count is None or self.count > ENUM_LIMIT:
            raise UsageError("cover too large to list; use the certified count")
        if self.regime == "low":
            return [(np.zeros(self.N), 1.0)]
        K = int(math.floor(1.0 / self.side + 0.5 + 1e-12))
        pts = np.array(list(itertools.product(range(-K, K + 1), repeat=self.N)), dtype=np.int64)
        keep = pts[self.contains_cube(pts)]
        return [(self.centers(k), self.radius) for k in keep]

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "N": self.N,
            "n": self.n,
            "sigma": self.sigma,
            "side": self.side,
            "linf_radius": self.radius,
            "count": self.count,
            "count_exact": self.count_exact,
            "log2_count_bound": self.log2_count_bound,
            "certified_log2_bound": self.certified_log2,
            "certified": self.certified,
            "m": self.m,
            "l2_diameter_in_ball": self.l2_diameter_in_ball,
        }


def regime_for(N: int, n: int, sigma: int) -> str:
    mid = middle_range(N, sigma)
    if n < mid.start:
        return "low"
    if n < mid.stop:
        return "middle"
    return "high"


def ball_cube_cover(N: int, n: int, sigma: int, regime: str | None = None, strict: bool = True) -> CubeCover:
    """Cover of B_N(0,1) aimed at N_{n+sigma} cubes.

    ``strict`` raises :class:`ParameterError` when the count certificate fails.
    """
    if N < 2 or N > COUNT_N_MAX:
        raise UsageError(f"N must lie in [2, {COUNT_N_MAX}]")
    if n < 0 or sigma < 1:
        raise UsageError("need n >= 0 and sigma >= 1")
    n0 = base_level(N)
    auto = regime_for(N, n, sigma)
    regime = auto if regime is None else regime
    cert = log2_level_cardinality(n + sigma)
    if regime == "low":
        cov = CubeCover("low", N, n, sigma, 2.0, 1, 0.0, cert, True)
    elif regime == "middle":
        if n not in middle_range(N, sigma):
            raise UsageError(f"middle regime needs n in {list(middle_range(N, sigma))}, got {n}")
        m = m_sequence(N, sigma).as_dict()[n]
        t = 1.0 / math.sqrt(m)
        if N <= 64:
            count = budget_count(N, m)
            cov = CubeCover("middle", N, n, sigma, 2 * t, count, math.log2(count), cert, True, m=m)
        else:
            # binom(N, m) subsets times cubes per subset, by volume
            per = log2_ball_volume(m, 1 + 2 * t * math.sqrt(m)) - m * math.log2(2 * t)
            lb = (special.gammaln(N + 1) - special.gammaln(m + 1) - special.gammaln(N - m + 1)) / math.log(2) + per
            cov = CubeCover("middle", N, n, sigma, 2 * t, None, lb, cert, False, m=m)
    elif regime == "high":
        if n < n0:
            raise UsageError(f"high regime needs n >= n_0 = {n0}, got {n}")
        log2_h = -0.5 * math.log2(N) - (2.0**n) / N
        h = 2.0**log2_h
        count = lattice_count(N, h) if N <= EXPLICIT_N_MAX and h > 0 else None
        if count is not None:
            cov = CubeCover("high", N, n, sigma, h, count, math.log2(count), cert, True)
        else:
            # disjoint cubes meeting the ball sit inside B(0, 1 + h sqrt N)
            lb = log2_ball_volume(N, 1 + h * math.sqrt(N)) - N * log2_h
            cov = CubeCover("high", N, n, sigma, h, None, lb, cert, False)
    else:
        raise UsageError(f"unknown regime {regime!r}")
    cov.extra["auto_regime"] = auto
    if strict and not cov.certified:
        raise ParameterError(f"{regime} cover for N={N}, n={n} exceeds N_(n+sigma) with sigma={sigma}; try a larger sigma")
    return cov


def calibrate_sigma(N: int, extra_levels: int = 4, sigma_max: int = 16) -> int:
    """Smallest sigma for which every regime's certificate holds on n = 0..n_0+sigma+extra_levels."""
    for sigma in range(1, sigma_max + 1):
        try:
            m_sequence(N, sigma)
            top = base_level(N) + sigma + extra_levels
            if all(ball_cube_cover(N, n, sigma, strict=False).certified for n in range(top + 1)):
                return sigma
        except ParameterError:
            continue
    raise ParameterError(f"no sigma <= {sigma_max} certifies all covers for N={N}")


# ----------------------------------------------------------------------------
# audits


def ball_samples(N: int, count: int, seed: int) -> np.ndarray:
    """Fixed-seed rejection samples, uniform on B_N(0,1)."""
    out = []
    have = 0
    j = 0
    while have < count:
        x = 2.0 * rng.uniforms(seed, j, (rng.CHUNK, N)) - 1.0
        x = x[np.sum(x * x, axis=1) <= 1.0]
        out.append(x)
        have += x.shape[0]
        j += 1
    return np.concatenate(out)[:count]


@dataclass
class CoverAudit:
    points: int
    misses: int
    max_residual: float
    rows: list

    @property
    def ok(self) -> bool:
        return self.misses == 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["point_id", "cube_id", "linf_residual"])
        for r in self.rows:
            w.writerow(r)
        return buf.getvalue()


def audit_cover(cov: CubeCover, samples: int = 10_000, seed: int = 0) -> CoverAudit:
    """Locate every sampled ball point in a cover cube; count points left outside."""
    x = ball_samples(cov.N, samples, seed)
    k = cov.locate(x)
    centers = cov.centers(k) if cov.regime != "low" else np.zeros_like(x)
    resid = np.abs(x - centers).max(axis=1)
    inside = resid <= cov.radius * (1 + 1e-12) + 1e-15
    member = cov.contains_cube(k)
    hit = inside & member
    if not np.all(hit) and cov.count is not None and cov.count <= 50_000:
        # direct scan over the explicit list for anything the lattice lookup missed
        cubes = cov.cubes()
        C = np.array([c for c, _ in cubes])
        for i in np.flatnonzero(~hit):
            r = np.abs(C - x[i]).max(axis=1)
            j = int(np.argmin(r))
            if r[j] <= cov.radius * (1 + 1e-12):
                hit[i] = True
                resid[i] = r[j]
    rows = [(i, ";".join(str(v) for v in k[i]), repr(float(resid[i]))) for i in range(x.shape[0])]
    if cov.regime == "middle":
        # at most m coordinates of a ball point exceed t in modulus
        big = (np.abs(x) > cov.radius).sum(axis=1)
        if np.any(big > cov.m):
            raise AssertionError("a ball point has more than m_n large coordinates")
    return CoverAudit(x.shape[0], int(np.sum(~hit)), float(resid.max()), rows)


# ----------------------------------------------------------------------------
# ellipsoid entropy sum


@dataclass
class EllipsoidEntropy:
    value: float
    schwartz_cap: float
    terms: list

    @property
    def ok(self) -> bool:
        return self.value <= self.schwartz_cap + 1e-12


def ellipsoid_entropy_bound(x: IndexedVector, t: IndexedVector) -> EllipsoidEntropy:
    """sum_{n : 2^n <= d} 2^{n/2} a_(2^n), with a the products |x_i t_i| sorted
    decreasingly and indexed from 1; also the cap 2 ||x||_2 ||t||_2."""
    xa = x.coords if isinstance(x, IndexedVector) else np.asarray(x)
    ta = t.coords if isinstance(t, IndexedVector) else np.asarray(t)
    if xa.shape != ta.shape:
        raise UsageError("x and t must have equal length")
    a = np.sort(np.abs(xa) * np.abs(ta))[::-1]
    d = a.size
    terms = []
    n = 0
    while (1 << n) <= d:
        terms.append(2.0 ** (n / 2.0) * float(a[(1 << n) - 1]))
        n += 1
    cap = 2.0 * float(np.linalg.norm(xa)) * float(np.linalg.norm(ta))
    return EllipsoidEntropy(float(sum(terms)), cap, terms)

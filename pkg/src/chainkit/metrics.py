"""Distance families q_n on finite point sets.

Four constructions are provided:

* quantile distances for Gaussian increments, solved from the closed-form
  half-normal excess E(|Z| - a)_+ = 2 phi(a) - 2 a Q(a);
* empirical quantile distances over a sample of |X(t) - X(s)|;
* moment distances 2 ||X(t) - X(s)||_{2^n};
* scaled canonical distances C 2^{n/2} ||t - s||_2.

A :class:`DistanceFamily` is lazy: level matrices are built on first access
and cached.
"""
from __future__ import annotations

import csv
import functools
import math
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import special

from .core import (
    IndexedVector,
    PointSet,
    StructuralError,
    UsageError,
    inverse_level_cardinality,
    log2_level_cardinality,
)

LN2 = math.log(2.0)
REL_TOL = 1e-10
TRIANGLE_TOL = 1e-9
MONOTONE_TOL = 1e-12


class RangeError(ArithmeticError):
    """A requested moment level cannot be represented."""


# ----------------------------------------------------------------------------
# distance matrices


class DistanceMatrix:
    """Symmetric, nonnegative, zero-diagonal m x m matrix (read-only)."""

    def __init__(self, entries, check: bool = True):
        a = np.array(entries, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise StructuralError("distance matrix must be square")
        if check:
            if not np.all(np.isfinite(a)):
                raise StructuralError("distance entries must be finite")
            if np.any(a < 0):
                raise StructuralError("distance entries must be nonnegative")
            if np.any(np.diag(a) != 0):
                raise StructuralError("distance matrix needs a zero diagonal")
            if not np.array_equal(a, a.T):
                # tiny asymmetries from floating sums are symmetrized away
                if np.max(np.abs(a - a.T)) > 1e-12 * max(1.0, float(np.max(a))):
                    raise StructuralError("distance matrix must be symmetric")
                a = np.maximum(a, a.T)
        a.setflags(write=False)
        self.entries = a

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, ij):
        return self.entries[ij]

    def __mul__(self, c: float) -> DistanceMatrix:
        if c < 0:
            raise UsageError("distance scale must be >= 0")
        return DistanceMatrix(self.entries * c, check=False)

    __rmul__ = __mul__

    def diameter(self, idx=None) -> float:
        if idx is None:
            return float(self.entries.max()) if self.size else 0.0
        idx = np.asarray(idx, dtype=np.intp)
        if idx.size <= 1:
            return 0.0
        return float(self.entries[np.ix_(idx, idx)].max())

    def submatrix(self, idx) -> DistanceMatrix:
        idx = np.asarray(idx, dtype=np.intp)
        return DistanceMatrix(self.entries[np.ix_(idx, idx)], check=False)

    def triangle_violation(self) -> float:
        """Largest q(u,w) - q(u,v) - q(v,w) over all triples (<= 0 for a metric)."""
        d = self.entries
        worst = -math.inf
        for v in range(self.size):
            via = d[:, v][:, None] + d[v, :][None, :]
            worst = max(worst, float(np.max(d - via)))
        return worst

    def is_metric(self, tol: float = TRIANGLE_TOL) -> bool:
        return self.triangle_violation() <= tol

    def to_csv(self, path: str | Path | None = None) -> str:
        lines = [",".join([""] + [str(j) for j in range(self.size)])]
        for i, row in enumerate(self.entries):
            lines.append(",".join([str(i)] + [repr(float(x)) for x in row]))
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path: str | Path) -> DistanceMatrix:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        body = [[float(x) for x in r[1:]] for r in rows[1:]]
        return cls(body)


def _pairwise_l2(a: np.ndarray) -> np.ndarray:
    # direct differences keep zero distances exactly zero
    diff = np.abs(a[:, None, :] - a[None, :, :])
    return np.sqrt(np.sum(diff**2, axis=2))


def canonical_distance(T: PointSet) -> DistanceMatrix:
    """d(s, t) = ||t - s||_2 with moduli for complex coordinates."""
    return DistanceMatrix(_pairwise_l2(T.array))


def weighted_distance(T: PointSet, w: IndexedVector | np.ndarray) -> DistanceMatrix:
    """d_w(s, t) = (sum_i |w_i|^2 |s_i - t_i|^2)^{1/2}."""
    w = w.coords if isinstance(w, IndexedVector) else np.asarray(w)
    if w.ndim != 1 or w.shape[0] != T.dim:
        raise StructuralError(f"weight has length {w.shape[-1] if w.ndim else 0}, points have dim {T.dim}")
    return DistanceMatrix(_pairwise_l2(T.array * np.abs(w)[None, :]))


# ----------------------------------------------------------------------------
# Gaussian quantile distance


def half_normal_excess(a: float) -> float:
    """E(|Z| - a)_+ for a standard normal Z."""
    return 2.0 * (math.exp(-0.5 * a * a) / math.sqrt(2 * math.pi) - a * special.ndtr(-a))


def _log_excess_ratio(a: float) -> float:
    """log F(a) with F(a) = E(|Z|/a - 1)_+ = (2 phi(a) - 2 a Q(a)) / a."""
    if a <= 0:
        return math.inf
    if a > 1e150:
        return -math.inf
    log_phi = -0.5 * a * a - 0.5 * math.log(2 * math.pi)
    if a <= 30.0:
        # Mills ratio Q/phi through erfcx keeps the far tail accurate
        mills = math.sqrt(math.pi / 2.0) * special.erfcx(a / math.sqrt(2.0))
        gap = 1.0 - a * mills
    else:
        # 1 - a Q/phi = 1/a^2 - 3/a^4 + 15/a^6 - ...
        x = 1.0 / (a * a)
        gap = x * (1 - x * (3 - x * (15 - x * (105 - x * 945))))
    return math.log(2.0) + log_phi + math.log(gap) - math.log(a)


def _log_target(n: int) -> float:
    return -log2_level_cardinality(n) * LN2


@functools.lru_cache(maxsize=None)
def unit_gaussian_quantile(n: int) -> float:
    """a*_n: the root of E(|Z|/a - 1)_+ = 1/N_n for a standard normal Z."""
    if n < 0:
        raise UsageError(f"level must be >= 0, got {n}")
    target = _log_target(n)
    scale = 2.0 + 2.0 ** (n / 2.0) * 4.0
    lo = math.log(1e-12 * scale)
    # log(scale * (1 + N_n)) without forming N_n
    e = log2_level_cardinality(n)
    hi = math.log(scale) + (math.log1p(2.0**e) if e < 1000 else e * LN2)
    # the root is about sqrt(2 log N_n), far below e^700 for any usable level
    hi = min(hi, 700.0)
    # geometric bisection: relative width halves in log each step
    while hi - lo > REL_TOL * 1e-2:
        mid = 0.5 * (lo + hi)
        if _log_excess_ratio(math.exp(mid)) > target:
            lo = mid
        else:
            hi = mid
    return math.exp(hi)


def gaussian_quantile_distance(sigma: float, n: int) -> float:
    """Smallest q with E(sigma |Z| / q - 1)_+ <= 1/N_n; equals sigma * a*_n."""
    if sigma < 0:
        raise UsageError("sigma must be >= 0")
    if sigma == 0:
        return 0.0
    return float(sigma) * unit_gaussian_quantile(n)


# ----------------------------------------------------------------------------
# empirical quantile distance


def empirical_quantile_distance(diff_samples, n: int) -> float:
    """Quantile level n of the empirical law of |X(t) - X(s)|.

    On the empirical measure F(q) = (1/m) sum_j (s_j/q - 1)_+ is piecewise of
    the form (P_k/q - k)/m, where P_k sums the k largest samples, and F
    dominates every such piece. The root of F(q) = c therefore is
    max_k P_k / (k + m c), computed exactly rather than by bisection.
    """
    s = np.abs(np.asarray(diff_samples, dtype=np.float64).ravel())
    if s.size == 0:
        raise UsageError("empirical quantile needs at least one sample")
    if n < 0:
        raise UsageError(f"level must be >= 0, got {n}")
    if not np.all(np.isfinite(s)):
        raise UsageError("samples must be finite")
    top = s.max()
    if top == 0:
        return 0.0
    desc = np.sort(s)[::-1]
    prefix = np.cumsum(desc)
    k = np.arange(1, s.size + 1, dtype=np.float64)
    mc = s.size * inverse_level_cardinality(n)
    return float(np.max(prefix / (k + mc)))


def empirical_excess(diff_samples, q: float) -> float:
    """(1/m) sum_j (s_j/q - 1)_+; the quantity the empirical root equates to 1/N_n."""
    s = np.abs(np.asarray(diff_samples, dtype=np.float64).ravel())
    return float(np.mean(np.maximum(s / q - 1.0, 0.0)))


# ----------------------------------------------------------------------------
# moment distance


def _check_moment_level(n: int) -> int:
    if n < 0:
        raise UsageError(f"level must be >= 0, got {n}")
    if n >= 1024:
        raise RangeError(f"moment order 2**{n} is not representable (level n={n})")
    return n


def gaussian_moment_norm(sigma: float, n: int) -> float:
    """||sigma Z||_p for p = 2^n, from E|Z|^p = 2^{p/2} Gamma((p+1)/2) / sqrt(pi)."""
    _check_moment_level(n)
    if sigma == 0:
        return 0.0
    p = 2.0**n
    log_m = 0.5 * p * LN2 + special.gammaln(0.5 * (p + 1)) - 0.5 * math.log(math.pi)
    return float(sigma) * math.exp(log_m / p)


def moment_distance(diff_samples_or_law, n: int) -> float:
    """2 ||D||_{2^n}.

    ``diff_samples_or_law`` is either an array of |D| draws or a mapping
    ``{"law": "gaussian", "sigma": s}`` for an exact Gaussian increment.
    """
    _check_moment_level(n)
    if isinstance(diff_samples_or_law, dict):
        law = diff_samples_or_law.get("law")
        if law != "gaussian":
            raise UsageError(f"unsupported increment law {law!r}")
        return 2.0 * gaussian_moment_norm(float(diff_samples_or_law["sigma"]), n)
    s = np.abs(np.asarray(diff_samples_or_law, dtype=np.float64).ravel())
    if s.size == 0:
        raise UsageError("moment distance needs at least one sample")
    if not np.all(np.isfinite(s)):
        raise RangeError(f"non-finite samples at level n={n}")
    top = s.max()
    if top == 0:
        return 0.0
    p = 2.0**n
    # scale by the max so the power never overflows
    mean = np.mean((s / top) ** p)
    val = 2.0 * top * mean ** (1.0 / p)
    if not math.isfinite(val):
        raise RangeError(f"moment overflow at level n={n}")
    return float(val)


# ----------------------------------------------------------------------------
# distance families


class DistanceFamily:
    """A sequence n -> q_n of distance matrices on ``base``.

    ``builder(n)`` returns the level-n entries; results are cached. ``n_max``
    of ``None`` leaves the family unbounded.
    """

    def __init__(
        self,
        base: PointSet,
        builder: Callable[[int], np.ndarray | DistanceMatrix],
        kind: str,
        n_max: int | None = None,
        meta: dict | None = None,
    ):
        if kind not in ("quantile", "moment", "scaled-canonical", "empirical-quantile", "custom"):
            raise UsageError(f"unknown family kind {kind!r}")
        self.base = base
        self.kind = kind
        self.n_max = n_max
        self.meta = dict(meta or {})
        self._builder = builder
        self._cache: dict[int, DistanceMatrix] = {}

    def __len__(self) -> int:
        return len(self.base)

    def level(self, n: int) -> DistanceMatrix:
        if n < 0:
            raise UsageError(f"level must be >= 0, got {n}")
        if self.n_max is not None and n > self.n_max:
            raise UsageError(f"level {n} beyond family n_max={self.n_max}")
        m = self._cache.get(n)
        if m is None:
            out = self._builder(n)
            m = out if isinstance(out, DistanceMatrix) else DistanceMatrix(out)
            self._cache[n] = m
        return m

    __getitem__ = level

    def levels(self, n_max: int | None = None) -> list[DistanceMatrix]:
        top = self.n_max if n_max is None else n_max
        if top is None:
            raise UsageError("unbounded family: pass n_max")
        return [self.level(n) for n in range(top + 1)]

    def monotonicity_violation(self, n_max: int) -> float:
        """max over n < n_max of q_n - q_{n+1} (<= 0 when monotone)."""
        worst = -math.inf
        for n in range(n_max):
            worst = max(worst, float(np.max(self.level(n).entries - self.level(n + 1).entries)))
        return worst

    def dominates(self, other: DistanceFamily, n_max: int, tol: float = 0.0) -> bool:
        return all(
            np.all(self.level(n).entries >= other.level(n).entries * (1 - tol) - tol) for n in range(n_max + 1)
        )

    def export_csv(self, directory: str | Path, n_max: int | None = None) -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for n, m in enumerate(self.levels(n_max)):
            p = directory / f"level_{n}.csv"
            m.to_csv(p)
            paths.append(p)
        return paths


def scaled_family(base: PointSet, d: DistanceMatrix, factor: Callable[[int], float], kind="custom", **kw):
    """q_n = factor(n) * d."""
    return DistanceFamily(base, lambda n: d * factor(n), kind=kind, **kw)


def gaussian_quantile_family(T: PointSet, d: DistanceMatrix | None = None, n_max: int | None = None) -> DistanceFamily:
    """Exact quantile family q_n = a*_n d for a Gaussian process with increment sd d."""
    d = canonical_distance(T) if d is None else d
    return scaled_family(T, d, unit_gaussian_quantile, kind="quantile", n_max=n_max)


def gaussian_moment_family(T: PointSet, d: DistanceMatrix | None = None, n_max: int | None = None) -> DistanceFamily:
    d = canonical_distance(T) if d is None else d
    return scaled_family(T, d, lambda n: 2.0 * gaussian_moment_norm(1.0, n), kind="moment", n_max=n_max)


def minimal_admissible_constant(n_max: int) -> float:
    """Smallest C with C 2^{n/2} >= a*_n for every n <= n_max."""
    return max(unit_gaussian_quantile(n) / 2.0 ** (n / 2.0) for n in range(n_max + 1))


def scaled_canonical_family(T: PointSet, C: float, n_max: int = 8) -> DistanceFamily:
    """q_n = C 2^{n/2} d(s, t), flagged admissible for Gaussian canonical processes iff
    C 2^{n/2} >= a*_n at every level n <= n_max."""
    if not C > 0:
        raise UsageError("C must be > 0")
    d = canonical_distance(T)
    c_min = minimal_admissible_constant(n_max)
    meta = {"C": float(C), "C_min": c_min, "admissible": bool(C >= c_min), "admissibility_levels": n_max}
    return DistanceFamily(T, lambda n: d * (C * 2.0 ** (n / 2.0)), kind="scaled-canonical", n_max=None, meta=meta)


def empirical_quantile_family(
    T: PointSet, samples: np.ndarray, seed: int | None = None, n_max: int | None = None
) -> DistanceFamily:
    """Quantile family from an (m, |T|) array of joint draws of (X(t))_t."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[1] != len(T):
        raise StructuralError(f"samples must be (m, {len(T)})")
    k = len(T)

    def build(n: int) -> np.ndarray:
        out = np.zeros((k, k))
        for i in range(k):
            for j in range(i + 1, k):
                out[i, j] = out[j, i] = empirical_quantile_distance(samples[:, i] - samples[:, j], n)
        return out

    meta = {"samples": samples.shape[0], "seed": seed}
    return DistanceFamily(T, build, kind="empirical-quantile", n_max=n_max, meta=meta)


def empirical_moment_family(T: PointSet, samples: np.ndarray, seed: int | None = None, n_max: int | None = None):
    samples = np.asarray(samples, dtype=np.float64)
    k = len(T)

    def build(n: int) -> np.ndarray:
        out = np.zeros((k, k))
        for i in range(k):
            for j in range(i + 1, k):
                out[i, j] = out[j, i] = moment_distance(samples[:, i] - samples[:, j], n)
        return out

    return DistanceFamily(T, build, kind="moment", n_max=n_max, meta={"samples": samples.shape[0], "seed": seed})

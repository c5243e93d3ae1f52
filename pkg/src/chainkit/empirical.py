"""Sum-of-squares bounds for empirical processes over small function families.

A family carries a pair of distances (d1, d2) certifying the two-level tail
P(|(f - g)(X)| > d1 t + d2 sqrt(t)) <= 2 exp(-t) for all t > 0. Certificates
are computed from the catalog functions and the sampler:

* differences bounded by B on the support: d1 = 0, d2 = B / sqrt(ln 2), since
  the threshold exceeds B once t >= ln 2 and 2 exp(-t) >= 1 before;
* Gaussian inputs with an affine part c.x + e (and bounded remainder R):
  d1 = 0, d2 = sqrt(2) ||c|| + (|e| + R) / sqrt(ln 2), from the Gaussian
  tail P(|Z| > sqrt(2t)) <= exp(-t).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .core import BoundReport, PointSet, StructuralError, UsageError
from .metrics import DistanceMatrix
from .partition import combined_partition, gamma_scaled_family

SQRT_LN2 = math.sqrt(math.log(2.0))


# ----------------------------------------------------------------------------
# samplers


@dataclass(frozen=True)
class Sampler:
    kind: str
    dim: int
    values: tuple | None = None
    probs: tuple | None = None

    @classmethod
    def from_dict(cls, doc: dict) -> Sampler:
        kind = doc.get("kind")
        if kind in ("uniform", "normal"):
            return cls(kind, int(doc.get("dim", 1)))
        if kind == "discrete":
            vals = np.atleast_2d(np.asarray(doc["values"], dtype=np.float64))
            if vals.shape[0] == 1 and np.asarray(doc["values"]).ndim == 1:
                vals = vals.T
            probs = np.asarray(doc.get("probs", np.full(vals.shape[0], 1.0 / vals.shape[0])), dtype=np.float64)
            if probs.shape[0] != vals.shape[0] or np.any(probs < 0) or abs(probs.sum() - 1) > 1e-9:
                raise StructuralError("field 'probs': must be a probability vector matching 'values'")
            return cls("discrete", vals.shape[1], tuple(map(tuple, vals)), tuple(probs))
        raise StructuralError(f"field 'kind': unknown sampler {kind!r}")

    def to_dict(self) -> dict:
        doc = {"kind": self.kind, "dim": self.dim}
        if self.kind == "discrete":
            doc["values"] = [list(v) for v in self.values]
            doc["probs"] = list(self.probs)
        return doc

    def draw(self, seed: int, j: int, n: int, per: int = 1) -> np.ndarray:
        """(n, per, dim) draws from substream j."""
        shape = (n, per, self.dim)
        if self.kind == "uniform":
            return rng.uniforms(seed, j, shape)
        if self.kind == "normal":
            return rng.normals(seed, j, shape)
        vals = np.asarray(self.values)
        cdf = np.cumsum(self.probs)
        cdf[-1] = 1.0
        idx = np.searchsorted(cdf, rng.uniforms(seed, j, (n, per)), side="right")
        return vals[np.minimum(idx, len(cdf) - 1)]


# ----------------------------------------------------------------------------
# catalog functions


@dataclass(frozen=True)
class CatalogFunction:
    """affine: a.x + b; clipped-affine: clip(a.x + b, lo, hi); step: c 1{x_j > theta}."""

    kind: str
    a: tuple = ()
    b: float = 0.0
    lo: float = -math.inf
    hi: float = math.inf
    coord: int = 0
    theta: float = 0.0
    c: float = 0.0

    @classmethod
    def from_dict(cls, doc: dict, dim: int) -> CatalogFunction:
        kind = doc.get("kind")
        if kind == "zero":
            return cls("affine", tuple([0.0] * dim), 0.0)
        if kind in ("affine", "clipped-affine"):
            a = tuple(float(x) for x in np.atleast_1d(doc.get("a", [0.0] * dim)))
            if len(a) != dim:
                raise StructuralError(f"field 'a': expected length {dim}")
            b = float(doc.get("b", 0.0))
            if kind == "affine":
                return cls("affine", a, b)
            lo, hi = float(doc["lo"]), float(doc["hi"])
            if lo > hi:
                raise StructuralError("field 'lo': must not exceed 'hi'")
            return cls("clipped-affine", a, b, lo, hi)
        if kind == "step":
            j = int(doc.get("coord", 0))
            if not 0 <= j < dim:
                raise StructuralError(f"field 'coord': outside 0..{dim - 1}")
            return cls("step", coord=j, theta=float(doc.get("theta", 0.0)), c=float(doc.get("c", 1.0)))
        raise StructuralError(f"field 'kind': unknown function kind {kind!r}")

    def to_dict(self) -> dict:
        if self.kind == "affine":
            return {"kind": "affine", "a": list(self.a), "b": self.b}
        if self.kind == "clipped-affine":
            return {"kind": "clipped-affine", "a": list(self.a), "b": self.b, "lo": self.lo, "hi": self.hi}
        return {"kind": "step", "coord": self.coord, "theta": self.theta, "c": self.c}

    @property
    def is_zero(self) -> bool:
        if self.kind == "step":
            return self.c == 0
        if self.kind == "affine":
            return self.b == 0 and not any(self.a)
        return not any(self.a) and min(max(self.b, self.lo), self.hi) == 0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "step":
            return self.c * (x[..., self.coord] > self.theta)
        y = x @ np.asarray(self.a) + self.b
        if self.kind == "clipped-affine":
            y = np.clip(y, self.lo, self.hi)
        return y

    def has_core(self) -> bool:
        return self.kind in ("affine", "clipped-affine")

    def value_range(self, sampler: Sampler) -> tuple[float, float]:
        if sampler.kind == "discrete":
            v = self(np.asarray(sampler.values))
            return float(v.min()), float(v.max())
        if self.kind == "step":
            return min(0.0, self.c), max(0.0, self.c)
        a = np.asarray(self.a)
        if sampler.kind == "normal":
            lo, hi = (-math.inf, math.inf) if np.any(a != 0) else (self.b, self.b)
        else:
            lo = self.b + float(np.minimum(a, 0).sum())
            hi = self.b + float(np.maximum(a, 0).sum())
        if self.kind == "clipped-affine":
            lo, hi = min(max(lo, self.lo), self.hi), max(min(hi, self.hi), self.lo)
        return lo, hi


def _affine_sup_cube(c: np.ndarray, e: float) -> float:
    """sup over [0,1]^k of |c.x + e|."""
    return max(abs(e + float(np.maximum(c, 0).sum())), abs(e + float(np.minimum(c, 0).sum())))


def pair_certificate(f: CatalogFunction, g: CatalogFunction, sampler: Sampler) -> tuple[float, float]:
    """(d1, d2) certifying the tail condition for f - g."""
    if f == g:
        return 0.0, 0.0
    if sampler.kind == "discrete":
        v = np.asarray(sampler.values)
        B = float(np.max(np.abs(f(v) - g(v))))
        return 0.0, B / SQRT_LN2
    flo, fhi = f.value_range(sampler)
    glo, ghi = g.value_range(sampler)
    B = max(fhi - glo, ghi - flo)
    if f.has_core() and g.has_core():
        c = np.asarray(f.a) - np.asarray(g.a)
        e = f.b - g.b
        clip = max(abs(f.lo - g.lo) if f.lo != g.lo else 0.0, abs(f.hi - g.hi) if f.hi != g.hi else 0.0)
        if sampler.kind == "uniform":
            B = min(B, _affine_sup_cube(c, e) + clip)
        elif math.isfinite(clip):
            gauss = math.sqrt(2.0) * float(np.linalg.norm(c)) + (abs(e) + clip) / SQRT_LN2
            if math.isfinite(B):
                return 0.0, min(B / SQRT_LN2, gauss)
            return 0.0, gauss
    if math.isfinite(B):
        return 0.0, B / SQRT_LN2
    # normal inputs: one side unbounded affine, the other bounded
    un, bd = (f, g) if not math.isfinite(f.value_range(sampler)[1] - f.value_range(sampler)[0]) else (g, f)
    blo, bhi = bd.value_range(sampler)
    R = max(abs(blo), abs(bhi))
    if not math.isfinite(R) or un.kind != "affine":
        raise UsageError("cannot certify a pair of unbounded functions with different clip levels")
    return 0.0, math.sqrt(2.0) * float(np.linalg.norm(un.a)) + (abs(un.b) + R) / SQRT_LN2


# ----------------------------------------------------------------------------
# families


class FunctionFamily:
    """Catalog functions, a sampler, and tail-certifying distances (d1, d2).

    The zero function is prepended when absent. Explicit ``d1``/``d2``
    override the computed certificates (used to study undersized distances).
    """

    def __init__(self, functions, sampler: Sampler, d1=None, d2=None, add_zero: bool = True):
        fs = list(functions)
        if not fs:
            raise StructuralError("function family must be nonempty")
        self.added_zero = False
        if add_zero and not any(f.is_zero for f in fs):
            fs = [CatalogFunction("affine", tuple([0.0] * sampler.dim), 0.0)] + fs
            self.added_zero = True
        self.functions = fs
        self.sampler = sampler
        m = len(fs)
        if d1 is None or d2 is None:
            c1 = np.zeros((m, m))
            c2 = np.zeros((m, m))
            for i in range(m):
                for j in range(i + 1, m):
                    c1[i, j], c2[i, j] = pair_certificate(fs[i], fs[j], sampler)
                    c1[j, i], c2[j, i] = c1[i, j], c2[i, j]
            d1 = c1 if d1 is None else d1
            d2 = c2 if d2 is None else d2
        self.d1 = d1 if isinstance(d1, DistanceMatrix) else DistanceMatrix(d1)
        self.d2 = d2 if isinstance(d2, DistanceMatrix) else DistanceMatrix(d2)
        if self.d1.size != m or self.d2.size != m:
            raise StructuralError("distance matrices must match the family size")

    @classmethod
    def from_dict(cls, doc: dict) -> FunctionFamily:
        try:
            sampler = Sampler.from_dict(doc["sampler"])
            fs = [CatalogFunction.from_dict(f, sampler.dim) for f in doc["functions"]]
        except KeyError as exc:
            raise StructuralError(f"malformed function family: missing field {exc}") from None
        return cls(fs, sampler)

    def to_dict(self) -> dict:
        return {"sampler": self.sampler.to_dict(), "functions": [f.to_dict() for f in self.functions]}

    def __len__(self) -> int:
        return len(self.functions)

    @property
    def contains_zero(self) -> bool:
        return any(f.is_zero for f in self.functions)

    @property
    def zero_index(self) -> int:
        return next(i for i, f in enumerate(self.functions) if f.is_zero)

    def index_set(self) -> PointSet:
        return PointSet(np.arange(len(self), dtype=np.float64)[:, None])

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """(..., |F|) values at sample points x of shape (..., dim)."""
        return np.stack([f(x) for f in self.functions], axis=-1).astype(np.float64)

    def subfamily(self, idx) -> FunctionFamily:
        idx = list(idx)
        return FunctionFamily(
            [self.functions[i] for i in idx], self.sampler, self.d1.submatrix(idx), self.d2.submatrix(idx), add_zero=False
        )


def lipschitz_family(size: int = 16, dim: int = 2, seed: int = 0, clipped: bool = True) -> FunctionFamily:
    """Reproducible bounded family on uniform [0,1]^dim: clipped affine maps plus steps."""
    g = np.random.Generator(np.random.Philox(key=seed))
    fs = []
    for k in range(size - 1):
        a = g.uniform(-1, 1, dim)
        b = g.uniform(-0.5, 0.5)
        if k % 4 == 3:
            fs.append(CatalogFunction("step", coord=int(g.integers(dim)), theta=float(g.uniform(0.2, 0.8)), c=float(g.uniform(-1, 1))))
        elif clipped:
            fs.append(CatalogFunction("clipped-affine", tuple(a), float(b), -0.75, 0.75))
        else:
            fs.append(CatalogFunction("affine", tuple(a), float(b)))
    return FunctionFamily(fs, Sampler("uniform", dim))


# ----------------------------------------------------------------------------
# tail audit


@dataclass
class TailAudit:
    t_grid: np.ndarray
    rows: list
    violations: list
    samples: int

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["f", "g", "t", "threshold", "exceedance", "stderr", "bound", "flag"])
        for r in self.rows:
            w.writerow(r)
        return buf.getvalue()


def audit_tail_condition(F: FunctionFamily, samples: int = 20_000, seed: int = 0, t_grid=None, sigmas: float = 3.0) -> TailAudit:
    """Empirical P(|(f-g)(X)| > d1 t + d2 sqrt t) against 2 exp(-t) for every pair."""
    if t_grid is None:
        t_grid = np.round(np.arange(0.25, 6.01, 0.25), 10)
    t_grid = np.asarray(t_grid, dtype=np.float64)
    vals = rng.map_chunks(samples, seed, lambda j, n: F.evaluate(F.sampler.draw(seed, j, n)[:, 0, :]))
    vals = vals.reshape(samples, len(F))
    rows, bad = [], []
    D1, D2 = F.d1.entries, F.d2.entries
    m = len(F)
    for i in range(m):
        for j in range(i + 1, m):
            diff = np.abs(vals[:, i] - vals[:, j])
            for t in t_grid:
                thr = D1[i, j] * t + D2[i, j] * math.sqrt(t)
                p = float(np.mean(diff > thr))
                se = math.sqrt(p * (1 - p) / samples + 1.0 / (4.0 * samples * samples))
                bound = min(1.0, 2.0 * math.exp(-t))
                flag = p - sigmas * se > bound
                rows.append((i, j, float(t), thr, p, se, bound, int(flag)))
                if flag:
                    bad.append((i, j, float(t)))
    return TailAudit(t_grid, rows, bad, samples)


# ----------------------------------------------------------------------------
# gamma_i and the bound


def d2bar_reduction(F: FunctionFamily) -> tuple[FunctionFamily, dict]:
    """Family with d2 replaced by max(d1, d2), plus the shared-tree certificate."""
    bar = DistanceMatrix(np.maximum(F.d1.entries, F.d2.entries))
    G = FunctionFamily(F.functions, F.sampler, F.d1, bar, add_zero=False)
    idx = F.index_set()
    tree = combined_partition(idx, F.d1, F.d2)
    lhs = tree.chain_sums(gamma_scaled_family(idx, bar, 2), 0)
    rhs = tree.chain_sums(gamma_scaled_family(idx, F.d1, 1), 0) + tree.chain_sums(gamma_scaled_family(idx, F.d2, 2), 0)
    cert = {
        "lhs": float(lhs.max()),
        "rhs": float(rhs.max()),
        "pointwise_ok": bool(np.all(lhs <= rhs + 1e-9)),
        "diameter_ok": bool(bar.diameter() <= F.d1.diameter() + F.d2.diameter() + 1e-12),
    }
    return G, cert


def _shared_tree(F: FunctionFamily):
    return combined_partition(F.index_set(), F.d1, F.d2)


def gamma_i_upper(F: FunctionFamily, i: int, tree=None) -> float:
    """sup_f sum_n 2^{n/i} Delta_i(A_n(f)) on the combined tree shared by i = 1, 2."""
    if i not in (1, 2):
        raise UsageError("i must be 1 or 2")
    tree = _shared_tree(F) if tree is None else tree
    d = F.d1 if i == 1 else F.d2
    return float(tree.chain_sums(gamma_scaled_family(F.index_set(), d, i), 0).max())


def lhs_values(F: FunctionFamily, N: int, samples: int, seed: int, witness: bool = False):
    """Per draw sup_f (N^{-1} sum_i f(X_i)^2)^{1/2}; with ``witness`` also the
    product-process path sup_f |sum_i u*_i f(X_i)| / sqrt N at u* = f(X)/||f(X)||."""

    def work(j: int, n: int) -> np.ndarray:
        x = F.sampler.draw(seed, j, n, N)
        v = F.evaluate(x)  # (n, N, |F|)
        rms = np.sqrt(np.mean(v * v, axis=1)).max(axis=1)
        if not witness:
            return rms
        nrm = np.linalg.norm(v, axis=1, keepdims=True)
        u = np.divide(v, nrm, out=np.zeros_like(v), where=nrm > 0)
        prod = np.abs(np.sum(u * v, axis=1)).max(axis=1) / math.sqrt(N)
        return np.stack([rms, prod], axis=1).ravel()

    out = rng.map_chunks(samples, seed, work)
    return out.reshape(-1, 2) if witness else out


def theorem6_bound(F: FunctionFamily, N: int, samples: int = 4000, seed: int = 0) -> BoundReport:
    """N^{-1/2} (gamma_1 + gamma_2) + Delta_1 + Delta_2 (constant bookkept as 1) against
    the Monte Carlo mean of sup_f (N^{-1} sum f(X_i)^2)^{1/2}."""
    if N < 1:
        raise UsageError("N must be >= 1")
    if not F.contains_zero:
        raise UsageError("the family must contain the zero function")
    reduced = False
    cert = None
    if np.any(F.d1.entries > F.d2.entries):
        F, cert = d2bar_reduction(F)
        reduced = True
    tree = _shared_tree(F)
    g1 = gamma_i_upper(F, 1, tree)
    g2 = gamma_i_upper(F, 2, tree)
    D1, D2 = F.d1.diameter(), F.d2.diameter()
    bound = (g1 + g2) / math.sqrt(N) + D1 + D2
    vals = lhs_values(F, N, samples, seed)
    n = vals.size
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return BoundReport(
        "theorem6",
        bound=bound,
        estimate=mean,
        stderr=se,
        seed=seed,
        samples=n,
        passed=None,
        extra={
            "N": N,
            "gamma1": g1,
            "gamma2": g2,
            "delta1": D1,
            "delta2": D2,
            "gamma_terms": (g1 + g2) / math.sqrt(N),
            "delta_terms": D1 + D2,
            "d2bar_applied": reduced,
            "d2bar_certificate": cert,
            "family_size": len(F),
        },
    )

"""Monte Carlo and exact-enumeration estimates of process suprema.

Each model maps a noise vector (Gaussian g or Rademacher eps, indexed by I)
to the values of the process at every index point, so suprema of the
canonical, product and character-twisted processes all reduce to a matrix
product followed by a row-wise max.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .core import IndexedVector, PointSet, StructuralError, UsageError

EXACT_DIM_MAX = 20
PRODUCT_CAP = 10**7
_BLOCK_ELEMS = 1 << 22


# ----------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class GaussianCanonical:
    T: PointSet
    noise = "gaussian"

    @property
    def dim(self) -> int:
        return self.T.dim

    def vectors(self) -> np.ndarray:
        return self.T.array


@dataclass(frozen=True)
class BernoulliCanonical:
    T: PointSet
    noise = "bernoulli"

    @property
    def dim(self) -> int:
        return self.T.dim

    def vectors(self) -> np.ndarray:
        return self.T.array


def _check_product(U: PointSet, T: PointSet):
    if U.dim != T.dim:
        raise StructuralError(f"U has dim {U.dim}, T has dim {T.dim}")
    if len(U) * len(T) > PRODUCT_CAP:
        raise UsageError(f"|U||T| = {len(U) * len(T)} exceeds the cap {PRODUCT_CAP}")


def _products(U: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Rows u * t for all (u, t), u-major."""
    return (U[:, None, :] * T[None, :, :]).reshape(-1, U.shape[1])


@dataclass(frozen=True)
class ProductGaussian:
    U: PointSet
    T: PointSet
    noise = "gaussian"

    def __post_init__(self):
        _check_product(self.U, self.T)

    @property
    def dim(self) -> int:
        return self.T.dim

    def vectors(self) -> np.ndarray:
        return _products(self.U.array, self.T.array)


@dataclass(frozen=True)
class ProductBernoulli:
    U: PointSet
    T: PointSet
    noise = "bernoulli"

    def __post_init__(self):
        _check_product(self.U, self.T)

    @property
    def dim(self) -> int:
        return self.T.dim

    def vectors(self) -> np.ndarray:
        return _products(self.U.array, self.T.array)


def character_weights(m: int, freqs) -> PointSet:
    """Rows u(h) = exp(2 pi i k h / m) for h in Z_m (duplicates dropped)."""
    freqs = np.asarray(freqs, dtype=np.int64)
    if m < 1:
        raise UsageError("group order m must be >= 1")
    h = np.arange(m)[:, None]
    # exact integer phases keep |u_i| = 1 to rounding of cos/sin only
    phase = (h * freqs[None, :]) % m
    ang = 2.0 * np.pi * phase / m
    u = np.cos(ang) + 1j * np.sin(ang)
    u[phase == 0] = 1.0
    return PointSet.from_points(u, field="complex")


@dataclass(frozen=True)
class CharacterBernoulli:
    T: PointSet
    m: int
    freqs: tuple
    noise = "bernoulli"

    def __post_init__(self):
        if len(self.freqs) != self.T.dim:
            raise StructuralError("one frequency per coordinate required")
        _check_product(self.U, self.T)

    @property
    def U(self) -> PointSet:
        return character_weights(self.m, self.freqs)

    @property
    def dim(self) -> int:
        return self.T.dim

    def vectors(self) -> np.ndarray:
        return _products(self.U.array, self.T.array.astype(np.complex128))


@dataclass
class SupEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int | None
    exact: bool
    values: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_values(cls, values: np.ndarray, seed: int | None) -> SupEstimate:
        n = values.size
        sd = float(np.std(values, ddof=1)) if n > 1 else 0.0
        return cls(float(np.mean(values)), sd / math.sqrt(n), n, seed, False, values)

    def within(self, target: float, sigmas: float = 3.0) -> bool:
        return abs(self.mean - target) <= sigmas * self.stderr


# ----------------------------------------------------------------------------
# suprema of a value block


def block_sup(values: np.ndarray, mode: str) -> np.ndarray:
    """Row-wise sup |X| (absolute) or sup |X(a) - X(b)| (increment)."""
    if mode == "absolute":
        return np.abs(values).max(axis=1)
    if mode == "increment":
        if np.iscomplexobj(values):
            k = values.shape[1]
            if k > 2048:
                raise UsageError("complex increment suprema limited to 2048 index points")
            out = np.zeros(values.shape[0])
            for a in range(k):
                np.maximum(out, np.abs(values - values[:, a : a + 1]).max(axis=1), out=out)
            return out
        return values.max(axis=1) - values.min(axis=1)
    raise UsageError(f"mode must be 'absolute' or 'increment', got {mode!r}")


def _sup_values(noise: np.ndarray, W: np.ndarray, mode: str) -> np.ndarray:
    """sup over rows w of W of the process noise . w, in column blocks."""
    n = noise.shape[0]
    step = max(1, _BLOCK_ELEMS // max(n, 1))
    if W.shape[0] <= step or (mode == "increment" and np.iscomplexobj(W)):
        return block_sup(noise @ W.T, mode)
    hi = np.full(n, -np.inf)
    lo = np.full(n, np.inf)
    for a in range(0, W.shape[0], step):
        v = noise @ W[a : a + step].T
        if mode == "absolute":
            np.maximum(hi, np.abs(v).max(axis=1), out=hi)
        else:
            np.maximum(hi, v.max(axis=1), out=hi)
            np.minimum(lo, v.min(axis=1), out=lo)
    return hi if mode == "absolute" else hi - lo


def sign_patterns(d: int, start: int, count: int) -> np.ndarray:
    k = np.arange(start, start + count, dtype=np.int64)[:, None]
    return (((k >> np.arange(d)) & 1) * 2 - 1).astype(np.float64)


def enumerate_signs(d: int, fn, block: int = 1 << 14) -> np.ndarray:
    """fn over all 2^d sign patterns (pattern k has eps_i = +1 iff bit i of k is set)."""
    if d > EXACT_DIM_MAX:
        raise UsageError(f"exact enumeration limited to d <= {EXACT_DIM_MAX} (got {d})")
    total = 1 << d
    parts = [fn(sign_patterns(d, a, min(block, total - a))) for a in range(0, total, block)]
    return np.concatenate(parts)


def sup_values(model, mode: str, samples: int, seed: int, exact: bool | None = None) -> tuple[np.ndarray, bool]:
    """Per-draw suprema and whether they are the full enumeration."""
    W = model.vectors()
    d = model.dim
    if exact is None:
        exact = model.noise == "bernoulli" and d <= EXACT_DIM_MAX
    if exact:
        if model.noise != "bernoulli":
            raise UsageError("exact enumeration applies to Rademacher models only")
        return enumerate_signs(d, lambda eps: _sup_values(eps, W, mode)), True
    if samples < 1:
        raise UsageError("samples must be >= 1")
    return rng.sample_functional(model.noise, d, lambda g: _sup_values(g, W, mode), samples, seed), False


def estimate_sup(model, mode: str = "absolute", samples: int = 10_000, seed: int = 0, exact: bool | None = None) -> SupEstimate:
    """E sup_t |X(t)| or E sup_{s,t} |X(t) - X(s)|.

    Rademacher models with d <= 20 are enumerated exactly unless ``exact=False``.
    """
    vals, is_exact = sup_values(model, mode, samples, seed, exact)
    if is_exact:
        return SupEstimate(float(np.mean(vals)), 0.0, vals.size, None, True, vals)
    return SupEstimate.from_values(vals, seed)


def estimate_product_sup(model, samples: int = 10_000, seed: int = 0, mode: str = "increment", exact: bool | None = None):
    """E sup over (u, t) of the product (or character) process; see :func:`estimate_sup`."""
    if not isinstance(model, (ProductGaussian, ProductBernoulli, CharacterBernoulli)):
        raise UsageError("estimate_product_sup needs a product or character model")
    return estimate_sup(model, mode, samples, seed, exact)


# ----------------------------------------------------------------------------
# tail comparison


def wilson_stderr(p: np.ndarray, n: int) -> np.ndarray:
    """Half-width of the z = 1 Wilson score interval."""
    p = np.asarray(p, dtype=np.float64)
    return np.sqrt(p * (1 - p) / n + 1.0 / (4.0 * n * n)) / (1.0 + 1.0 / n)


def _norm_rows(a: np.ndarray, norm: str) -> np.ndarray:
    if norm == "l2":
        return np.sqrt(np.sum(np.abs(a) ** 2, axis=-1))
    if norm == "linf":
        return np.abs(a).max(axis=-1)
    raise UsageError(f"norm must be 'l2' or 'linf', got {norm!r}")


@dataclass
class TailTable:
    t_grid: np.ndarray
    p_sup: np.ndarray
    se_sup: np.ndarray
    p_plain: np.ndarray
    se_plain: np.ndarray
    K1: float
    K2: float
    K: float
    exact: bool
    samples: int
    pareto: list = field(default_factory=list)

    def rows(self) -> list[tuple]:
        return list(zip(self.t_grid.tolist(), self.p_sup.tolist(), self.se_sup.tolist(), self.p_plain.tolist(), self.se_plain.tolist()))


def _tail(values: np.ndarray, t: np.ndarray) -> np.ndarray:
    s = np.sort(values)
    return 1.0 - np.searchsorted(s, t, side="left") / s.size


def tail_compare(
    U: PointSet,
    vectors: list,
    t_grid,
    samples: int = 10_000,
    seed: int = 0,
    norm: str = "l2",
    exact: bool | None = None,
    k1_grid=None,
) -> TailTable:
    """Tails of sup_u ||sum_i u_i v_i eps_i|| against ||sum_i v_i eps_i||.

    K2(K1) = max_t P(sup >= K1 t) / P(plain >= t); the reported pair minimizes
    max(K1, K2) over ``k1_grid``.
    """
    t_grid = np.asarray(t_grid, dtype=np.float64).ravel()
    if t_grid.size == 0:
        raise UsageError("t_grid must be nonempty")
    V = np.array([v.coords if isinstance(v, IndexedVector) else np.asarray(v) for v in vectors])
    if V.ndim != 2 or V.shape[0] != U.dim:
        raise StructuralError(f"need one vector per coordinate of U (dim {U.dim})")
    Ua = U.array
    d = V.shape[0]

    def both(eps: np.ndarray) -> np.ndarray:
        # (n, |U|, k) sums sum_i u_i v_i eps_i
        s = np.einsum("ni,ui,ik->nuk", eps, Ua, V)
        sup = _norm_rows(s, norm).max(axis=1)
        plain = _norm_rows(eps @ V, norm)
        return np.stack([sup, plain], axis=1)

    if exact is None:
        exact = d <= EXACT_DIM_MAX and (1 << d) <= 4 * max(samples, 1)
    if exact:
        vals = enumerate_signs(d, both, block=1 << 12)
    else:
        flat = rng.sample_functional("bernoulli", d, lambda e: both(e).ravel(), samples, seed)
        vals = flat.reshape(-1, 2)
    n = vals.shape[0]
    sup, plain = vals[:, 0], vals[:, 1]
    p1 = _tail(sup, t_grid)
    p2 = _tail(plain, t_grid)
    se1 = np.zeros_like(p1) if exact else wilson_stderr(p1, n)
    se2 = np.zeros_like(p2) if exact else wilson_stderr(p2, n)
    if k1_grid is None:
        k1_grid = np.round(np.arange(1.0, 8.0001, 0.05), 10)
    pareto = []
    best = (math.inf, math.inf, math.inf)
    for k1 in k1_grid:
        num = _tail(sup, k1 * t_grid)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(num == 0, 0.0, num / p2)
        k2 = max(1.0, float(np.max(r)))
        pareto.append((float(k1), k2))
        if max(k1, k2) < best[2]:
            best = (float(k1), k2, max(float(k1), k2))
    return TailTable(t_grid, p1, se1, p2, se2, best[0], best[1], best[2], bool(exact), n, pareto)

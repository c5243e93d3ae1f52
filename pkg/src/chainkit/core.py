"""Shared domain types and the N_n level-cardinality schedule.

N_0 = 1 and N_n = 2**(2**n) for n >= 1. Cardinalities up to n = 5 (2**32) are
exact Python ints; beyond that they are carried as base-2 logarithms, which is
all the library needs since counts above N_5 only ever enter comparisons.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import total_ordering
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

EXACT_LEVEL_MAX = 5


class UsageError(ValueError):
    """Raised for caller errors: caps exceeded, bad parameters, malformed input."""


class StructuralError(ValueError):
    """Raised when inputs are internally inconsistent (e.g. dimension mismatch)."""


# ----------------------------------------------------------------------------
# level schedule


def log2_level_cardinality(n: int) -> int:
    """log2 N_n: 0 for n = 0 and 2**n otherwise."""
    if n < 0:
        raise UsageError(f"level must be >= 0, got {n}")
    return 0 if n == 0 else 1 << n


@total_ordering
@dataclass(frozen=True)
class LogCardinality:
    """A cardinality 2**log2 too large to hold exactly."""

    log2: int

    def _other_log2(self, other) -> float:
        if isinstance(other, LogCardinality):
            return other.log2
        if isinstance(other, (int, np.integer)):
            other = int(other)
            if other <= 0:
                return -math.inf
            # exact for powers of two, otherwise only used in comparisons
            if other & (other - 1) == 0:
                return other.bit_length() - 1
            return math.log2(other)
        return NotImplemented

    def __eq__(self, other) -> bool:
        o = self._other_log2(other)
        if o is NotImplemented:
            return NotImplemented
        return self.log2 == o

    def __lt__(self, other) -> bool:
        o = self._other_log2(other)
        if o is NotImplemented:
            return NotImplemented
        return self.log2 < o

    def __hash__(self) -> int:
        return hash(("logcard", self.log2))

    def __mul__(self, other) -> LogCardinality:
        o = self._other_log2(other)
        if o is NotImplemented or o != int(o):
            return NotImplemented
        return LogCardinality(self.log2 + int(o))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"2**{self.log2}"


def level_cardinality(n: int) -> int | LogCardinality:
    """N_n; an exact int through n = 5, a :class:`LogCardinality` beyond."""
    e = log2_level_cardinality(n)
    if n <= EXACT_LEVEL_MAX:
        return 1 << e
    return LogCardinality(e)


def fits_level(count: int, n: int) -> bool:
    """Exact test of ``count <= N_n``."""
    if count <= 1:
        return True
    e = log2_level_cardinality(n)
    # count <= 2**e  <=>  (count - 1).bit_length() <= e
    return (int(count) - 1).bit_length() <= e


def inverse_level_cardinality(n: int) -> float:
    """1 / N_n as a float (0.0 once it underflows)."""
    e = log2_level_cardinality(n)
    return math.ldexp(1.0, -e) if e < 1075 else 0.0


@dataclass(frozen=True)
class LevelSchedule:
    n_max: int

    @property
    def values(self) -> tuple[int, ...]:
        """log2 N_n for n = 0..n_max."""
        return tuple(log2_level_cardinality(n) for n in range(self.n_max + 1))

    def cardinality(self, n: int) -> int | LogCardinality:
        if not 0 <= n <= self.n_max:
            raise UsageError(f"level {n} outside schedule 0..{self.n_max}")
        return level_cardinality(n)


# ----------------------------------------------------------------------------
# vectors and point sets


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _as_coords(values) -> np.ndarray:
    a = np.asarray(values)
    if a.dtype.kind == "c":
        a = a.astype(np.complex128)
    else:
        a = a.astype(np.float64)
    return a


@dataclass(frozen=True, eq=False)
class IndexedVector:
    """A finite vector t = (t_i) indexed by I = {0..d-1}, real or complex."""

    coords: np.ndarray

    def __post_init__(self):
        a = _as_coords(self.coords)
        if a.ndim != 1:
            raise StructuralError("IndexedVector needs a 1-d coordinate array")
        if not np.all(np.isfinite(a)):
            raise StructuralError("IndexedVector entries must be finite")
        object.__setattr__(self, "coords", _frozen(a))

    def __len__(self) -> int:
        return self.coords.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, IndexedVector):
            return NotImplemented
        return self.coords.shape == other.coords.shape and bool(np.all(self.coords == other.coords))

    def __hash__(self) -> int:
        return hash(self.coords.tobytes())

    @property
    def is_complex(self) -> bool:
        return self.coords.dtype.kind == "c"

    def norm1(self) -> float:
        return float(np.sum(np.abs(self.coords)))

    def norm2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coords) ** 2)))

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.coords))) if len(self) else 0.0


class PointSet:
    """A nonempty finite set of distinct points in R^d or C^d.

    Points are stored as the rows of an immutable (m, d) array. The plain
    constructor rejects duplicates; :meth:`from_points` drops them instead,
    keeping first occurrences in order.
    """

    def __init__(self, points, field: str | None = None):
        a = _as_coords(points)
        if a.ndim == 1:
            a = a.reshape(-1, 1) if a.size else a.reshape(0, 0)
        if a.ndim != 2:
            raise StructuralError("points must form an (m, d) array")
        if a.shape[0] == 0:
            raise StructuralError("PointSet must be nonempty")
        if not np.all(np.isfinite(a)):
            raise StructuralError("point coordinates must be finite")
        if field is None:
            field = "complex" if a.dtype.kind == "c" else "real"
        if field not in ("real", "complex"):
            raise StructuralError(f"unknown scalar field {field!r}")
        if field == "complex":
            a = a.astype(np.complex128)
        elif a.dtype.kind == "c":
            raise StructuralError("complex coordinates in a real PointSet")
        if len(_unique_row_index(a)) != a.shape[0]:
            raise StructuralError("PointSet contains duplicate points")
        self._array = _frozen(a)
        self.field = field

    @classmethod
    def from_points(cls, points, field: str | None = None) -> PointSet:
        a = _as_coords(points)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        keep = _unique_row_index(a)
        return cls(a[keep], field=field)

    @property
    def array(self) -> np.ndarray:
        return self._array

    @property
    def dim(self) -> int:
        return self._array.shape[1]

    @property
    def contains_origin(self) -> bool:
        return bool(np.any(np.all(self._array == 0, axis=1)))

    @property
    def is_complex(self) -> bool:
        return self.field == "complex"

    def __len__(self) -> int:
        return self._array.shape[0]

    def __getitem__(self, i: int) -> IndexedVector:
        return IndexedVector(self._array[i])

    def __iter__(self):
        for row in self._array:
            yield IndexedVector(row)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return (
            self.field == other.field
            and self._array.shape == other._array.shape
            and bool(np.all(self._array == other._array))
        )

    def __repr__(self) -> str:
        return f"PointSet(m={len(self)}, dim={self.dim}, field={self.field})"

    def origin_index(self) -> int | None:
        hits = np.flatnonzero(np.all(self._array == 0, axis=1))
        return int(hits[0]) if hits.size else None

    def with_origin(self) -> PointSet:
        if self.contains_origin:
            return self
        zero = np.zeros((1, self.dim), dtype=self._array.dtype)
        return PointSet(np.vstack([zero, self._array]), field=self.field)

    def scaled(self, lam: float) -> PointSet:
        return PointSet.from_points(self._array * lam, field=self.field)

    def subset(self, idx: Sequence[int]) -> PointSet:
        return PointSet(self._array[list(idx)], field=self.field)

    def norms(self, p: float = 2) -> np.ndarray:
        a = np.abs(self._array)
        if p == np.inf:
            return a.max(axis=1)
        if p == 1:
            return a.sum(axis=1)
        return np.sqrt((a**2).sum(axis=1))

    # serialization -----------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        if self.is_complex:
            pts = [[[float(z.real), float(z.imag)] for z in row] for row in self._array]
        else:
            pts = self._array.tolist()
        return {"dim": self.dim, "field": self.field, "points": pts}

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> PointSet:
        try:
            dim = int(doc["dim"])
            field = doc.get("field", "real")
            pts = doc["points"]
        except (KeyError, TypeError, ValueError) as exc:
            raise StructuralError(f"malformed PointSet document: missing field {exc}") from None
        if field == "complex":
            a = np.array(
                [[complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c) for c in row] for row in pts],
                dtype=np.complex128,
            )
        else:
            a = np.array(pts, dtype=np.float64)
        if a.ndim != 2 or a.shape[1] != dim:
            raise StructuralError(f"field 'points': rows must have length dim={dim}")
        return cls(a, field=field)


def _unique_row_index(a: np.ndarray) -> list[int]:
    seen: set[bytes] = set()
    keep = []
    # -0.0 and 0.0 are the same point
    b = a + 0.0
    for i, row in enumerate(b):
        key = row.tobytes()
        if key not in seen:
            seen.add(key)
            keep.append(i)
    return keep


class SetFamily:
    """A class of subsets of {0..d-1}, each member a bitmask int."""

    def __init__(self, ground_size: int, members: Iterable[int]):
        if ground_size < 0:
            raise StructuralError("ground_size must be >= 0")
        ms = [int(m) for m in members]
        full = (1 << ground_size) - 1
        for m in ms:
            if m < 0 or m & ~full:
                raise StructuralError(f"member {m:#x} not contained in ground set of size {ground_size}")
        if len(set(ms)) != len(ms):
            raise StructuralError("SetFamily members must be distinct")
        self.ground_size = ground_size
        self.members = tuple(ms)

    @classmethod
    def from_sets(cls, ground_size: int, sets: Iterable[Iterable[int]], dedupe: bool = True) -> SetFamily:
        masks = []
        for s in sets:
            m = 0
            for i in s:
                if not 0 <= int(i) < ground_size:
                    raise StructuralError(f"index {i} outside ground set of size {ground_size}")
                m |= 1 << int(i)
            masks.append(m)
        if dedupe:
            masks = list(dict.fromkeys(masks))
        return cls(ground_size, masks)

    @classmethod
    def power_set(cls, ground_size: int, support: Sequence[int] | None = None) -> SetFamily:
        """All subsets of ``support`` (default: the whole ground set)."""
        support = list(range(ground_size)) if support is None else list(support)
        masks = []
        for bits in range(1 << len(support)):
            m = 0
            for j, i in enumerate(support):
                if bits >> j & 1:
                    m |= 1 << i
            masks.append(m)
        return cls(ground_size, masks)

    def __len__(self) -> int:
        return len(self.members)

    def sets(self) -> list[list[int]]:
        return [[i for i in range(self.ground_size) if m >> i & 1] for m in self.members]

    def indicators(self) -> np.ndarray:
        """(len, ground_size) 0/1 matrix of member indicator vectors."""
        out = np.zeros((len(self.members), self.ground_size))
        for r, m in enumerate(self.members):
            for i in range(self.ground_size):
                if m >> i & 1:
                    out[r, i] = 1.0
        return out

    def union(self, other: SetFamily) -> SetFamily:
        if other.ground_size != self.ground_size:
            raise StructuralError("ground sizes differ")
        return SetFamily(self.ground_size, dict.fromkeys(self.members + other.members))

    def to_dict(self) -> dict[str, Any]:
        return {"ground_size": self.ground_size, "members": self.sets()}

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> SetFamily:
        try:
            return cls.from_sets(int(doc["ground_size"]), doc["members"])
        except KeyError as exc:
            raise StructuralError(f"malformed SetFamily document: missing field {exc}") from None


def load_json(path: str | Path) -> dict[str, Any]:
    with open(path) as fh:
        return json.load(fh)


def dump_json(doc: Any, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ----------------------------------------------------------------------------
# reports


@dataclass
class BoundReport:
    """One evaluated inequality: the bound, a paired estimate of its left side."""

    quantity: str
    bound: float
    estimate: float
    stderr: float = 0.0
    tau: int | None = None
    seed: int | None = None
    samples: int = 0
    passed: bool | None = None
    extra: dict[str, Any] = field(default_factory=dict)
    ratio: float = field(init=False)

    def __post_init__(self):
        self.bound = float(self.bound)
        self.estimate = float(self.estimate)
        self.stderr = float(self.stderr)
        if not self.bound >= 0:
            raise ValueError(f"{self.quantity}: bound must be >= 0, got {self.bound}")
        if not self.stderr >= 0:
            raise ValueError(f"{self.quantity}: stderr must be >= 0, got {self.stderr}")
        if self.bound > 0:
            self.ratio = self.estimate / self.bound
        else:
            self.ratio = 0.0 if self.estimate == 0 else math.inf

    def holds(self, sigmas: float = 3.0) -> bool:
        """estimate <= bound + sigmas * stderr."""
        return self.estimate <= self.bound + sigmas * self.stderr

    def margin(self, sigmas: float = 3.0) -> float:
        return self.bound + sigmas * self.stderr - self.estimate

"""Covers, entropy numbers, admissible partition trees and chaining functionals.

All covers are intrinsic (centers drawn from the point set). Exact covers come
from a subset dynamic program over center sets: for |T| <= 14 the radius
r(S) = max_j min_{i in S} D[i, j] of every center set S fits in memory, which
yields every k-center radius at once. Larger sets fall back to farthest-point
traversal.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import PointSet, StructuralError, UsageError, fits_level, log2_level_cardinality
from .metrics import DistanceFamily, DistanceMatrix, canonical_distance, scaled_family

EXACT_MAX = 14
CERT_TOL = 1e-12


class ConsistencyError(RuntimeError):
    """An internal certificate failed; indicates a bug, never bad input."""


@dataclass
class CoverResult:
    radius: float
    centers: np.ndarray
    assignment: np.ndarray
    exact: bool

    @property
    def size(self) -> int:
        return len(self.centers)


def _entries(dist) -> np.ndarray:
    return dist.entries if isinstance(dist, DistanceMatrix) else np.asarray(dist, dtype=np.float64)


def _assign(D: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Nearest center per point; ties go to the lowest center index."""
    cs = np.sort(centers)
    sub = D[cs]
    return cs[np.argmin(sub, axis=0)]


def level_capacity(n: int, m: int) -> int:
    """min(N_n, m) without materializing N_n."""
    e = log2_level_cardinality(n)
    return m if e >= m.bit_length() else min(m, 1 << e)


# ----------------------------------------------------------------------------
# exact covers


class ExactCovers:
    """All intrinsic k-center radii of a small metric space."""

    def __init__(self, dist):
        D = _entries(dist)
        m = D.shape[0]
        if m > EXACT_MAX:
            raise UsageError(f"exact covering limited to {EXACT_MAX} points (got {m}); use covering_greedy")
        self.D = D
        self.m = m
        full = 1 << m
        mind = np.empty((full, m))
        mind[0] = np.inf
        for b in range(m):
            lo = 1 << b
            np.minimum(mind[:lo], D[b][None, :], out=mind[lo : 2 * lo])
        self.radius_of = mind.max(axis=1)
        self.radius_of[0] = np.inf
        self.popcount = np.array([bin(s).count("1") for s in range(full)], dtype=np.int64)
        best = np.full(m + 1, np.inf)
        best_mask = np.zeros(m + 1, dtype=np.int64)
        for k in range(1, m + 1):
            idx = np.flatnonzero(self.popcount == k)
            j = int(np.argmin(self.radius_of[idx]))
            best[k] = self.radius_of[idx[j]]
            best_mask[k] = idx[j]
        self.kradius = best
        self.kmask = best_mask

    def covering_number(self, eps: float) -> int:
        ok = np.flatnonzero(self.kradius[1:] <= eps)
        return int(ok[0]) + 1

    def radius_with(self, k: int) -> float:
        return float(self.kradius[min(max(k, 1), self.m)])

    def cover_with(self, k: int) -> CoverResult:
        """Smallest-radius cover using at most k centers; fewest centers, then lowest mask."""
        k = min(max(k, 1), self.m)
        r = self.kradius[k]
        kk = int(np.flatnonzero(self.kradius[1:] <= r)[0]) + 1
        mask = int(self.kmask[kk])
        centers = np.array([i for i in range(self.m) if mask >> i & 1], dtype=np.intp)
        return CoverResult(float(r), centers, _assign(self.D, centers), True)

    def cover_at(self, eps: float) -> CoverResult:
        return self.cover_with(self.covering_number(eps))


def covering_number_exact(T: PointSet, dist, eps: float) -> int:
    """Minimal number of closed eps-balls centered in T that cover T."""
    if eps < 0:
        raise UsageError("eps must be >= 0")
    D = _entries(dist)
    if D.shape[0] != len(T):
        raise StructuralError("distance matrix size does not match point set")
    return ExactCovers(D).covering_number(eps)


# ----------------------------------------------------------------------------
# greedy covers


class GreedyCovers:
    """Farthest-point traversal from point 0; ties broken by lowest index."""

    def __init__(self, dist):
        D = _entries(dist)
        m = D.shape[0]
        order = [0]
        gap = D[0].copy()
        radii = [float(gap.max())]
        while len(order) < m and radii[-1] > 0:
            j = int(np.argmax(gap))
            order.append(j)
            np.minimum(gap, D[j], out=gap)
            radii.append(float(gap.max()))
        self.D = D
        self.m = m
        self.order = np.array(order, dtype=np.intp)
        # kradius[k] = radius of the first k centers
        self.kradius = np.array([np.inf] + radii + [0.0] * (m - len(radii)))

    def covering_number(self, eps: float) -> int:
        ok = np.flatnonzero(self.kradius[1:] <= eps)
        return int(ok[0]) + 1

    def radius_with(self, k: int) -> float:
        return float(self.kradius[min(max(k, 1), self.m)])

    def cover_with(self, k: int) -> CoverResult:
        k = min(max(k, 1), len(self.order))
        r = self.kradius[k]
        kk = int(np.flatnonzero(self.kradius[1:] <= r)[0]) + 1
        centers = self.order[:kk].copy()
        return CoverResult(float(r), centers, _assign(self.D, centers), False)

    def cover_at(self, eps: float) -> CoverResult:
        return self.cover_with(self.covering_number(eps))


def covering_greedy(T: PointSet, dist, eps: float) -> CoverResult:
    if eps < 0:
        raise UsageError("eps must be >= 0")
    D = _entries(dist)
    if D.shape[0] != len(T):
        raise StructuralError("distance matrix size does not match point set")
    return GreedyCovers(D).cover_at(eps)


def cover_engine(dist, method: str = "auto"):
    D = _entries(dist)
    if method == "auto":
        method = "exact" if D.shape[0] <= EXACT_MAX else "greedy"
    if method == "exact":
        return ExactCovers(D)
    if method == "greedy":
        return GreedyCovers(D)
    raise UsageError(f"unknown cover method {method!r}")


# ----------------------------------------------------------------------------
# entropy numbers


def entropy_covers(T: PointSet, fam: DistanceFamily, tau: int, n_max: int, method: str = "auto") -> list[CoverResult]:
    """Per level n, the smallest-radius cover of T under q_{n+tau} with at most N_n centers."""
    if tau < 0:
        raise UsageError("tau must be >= 0")
    m = len(T)
    out = []
    for n in range(n_max + 1):
        eng = cover_engine(fam.level(n + tau), method)
        out.append(eng.cover_with(level_capacity(n, m)))
    return out


def entropy_numbers(T: PointSet, fam: DistanceFamily, tau: int, n_max: int, method: str = "auto") -> np.ndarray:
    """e^tau_n = inf{eps : N(T, q_{n+tau}, eps) <= N_n} for n = 0..n_max."""
    return np.array([c.radius for c in entropy_covers(T, fam, tau, n_max, method)])


def entropy_depth(m: int) -> int:
    """First level n with N_n >= m; every entropy number from there on is 0."""
    n = 0
    while not fits_level(m, n):
        n += 1
    return n


# ----------------------------------------------------------------------------
# partition trees


def _refine(labels: np.ndarray, new: np.ndarray) -> np.ndarray:
    """Cell ids of the common refinement, numbered by lowest member index."""
    pairs = {}
    out = np.empty(len(labels), dtype=np.intp)
    for i, key in enumerate(zip(labels.tolist(), new.tolist())):
        if key not in pairs:
            pairs[key] = len(pairs)
        out[i] = pairs[key]
    return out


class PartitionTree:
    """Nested partitions A_0 = {T}, A_1, ..., A_L of {0..m-1}.

    ``labels[n][i]`` is the cell id of point i at level n; cells are numbered
    in order of their lowest member. ``reps[n][c]`` is the representative of
    cell c; a child keeps its parent's representative whenever it contains it.
    """

    def __init__(self, labels: list[np.ndarray], certificates: dict | None = None):
        if not labels:
            raise StructuralError("a tree needs at least level 0")
        self.m = len(labels[0])
        self.labels = [np.asarray(lab, dtype=np.intp) for lab in labels]
        self.certificates = dict(certificates or {})
        self.parents: list[np.ndarray] = []
        self.reps: list[np.ndarray] = []
        self._build_links()

    @classmethod
    def from_assignments(cls, m: int, assignments: list[np.ndarray], certificates=None) -> PartitionTree:
        """Level n intersects the partitions induced by assignments 0..n-1; stops at singletons."""
        labels = [np.zeros(m, dtype=np.intp)]
        for a in assignments:
            if labels[-1].max() + 1 == m:
                break
            labels.append(_refine(labels[-1], np.asarray(a)))
        return cls(labels, certificates)

    def _build_links(self):
        lab0 = self.labels[0]
        if np.any(lab0 != 0):
            raise ConsistencyError("level 0 must be the single cell T")
        self.reps = [np.array([0], dtype=np.intp)]
        self.parents = [np.array([-1], dtype=np.intp)]
        for n in range(1, len(self.labels)):
            lab, up = self.labels[n], self.labels[n - 1]
            k = int(lab.max()) + 1
            parent = np.full(k, -1, dtype=np.intp)
            for i in range(self.m):
                c = lab[i]
                if parent[c] == -1:
                    parent[c] = up[i]
                elif parent[c] != up[i]:
                    raise ConsistencyError(f"level {n} cell {c} straddles two parent cells")
            rep = np.full(k, -1, dtype=np.intp)
            prev = self.reps[-1]
            for c in range(k):
                t = prev[parent[c]]
                rep[c] = t if lab[t] == c else int(np.flatnonzero(lab == c)[0])
            self.parents.append(parent)
            self.reps.append(rep)

    @property
    def depth(self) -> int:
        """Index L of the last stored level."""
        return len(self.labels) - 1

    def cells(self, n: int) -> list[np.ndarray]:
        lab = self.labels[min(n, self.depth)]
        if n > self.depth and lab.max() + 1 < self.m:
            raise UsageError(f"level {n} beyond a non-terminal tree of depth {self.depth}")
        return [np.flatnonzero(lab == c) for c in range(int(lab.max()) + 1)]

    def cell_count(self, n: int) -> int:
        return int(self.labels[min(n, self.depth)].max()) + 1

    def cell_of(self, n: int, t: int) -> np.ndarray:
        lab = self.labels[min(n, self.depth)]
        return np.flatnonzero(lab == lab[t])

    def pi(self, n: int, t: int) -> int:
        """Representative pi_n(t) of the level-n cell containing t."""
        k = min(n, self.depth)
        return int(self.reps[k][self.labels[k][t]])

    def is_terminal(self) -> bool:
        return int(self.labels[-1].max()) + 1 == self.m

    def validate(self) -> None:
        for n in range(self.depth + 1):
            if not fits_level(self.cell_count(n), n):
                raise ConsistencyError(f"level {n} has {self.cell_count(n)} cells > N_{n}")
        # nestedness is enforced at construction; hereditary representatives:
        for n in range(1, self.depth + 1):
            for c, p in enumerate(self.parents[n]):
                t = self.reps[n - 1][p]
                if self.labels[n][t] == c and self.reps[n][c] != t:
                    raise ConsistencyError("representative not inherited")

    def refine_level(self, n: int, cell: int, part: np.ndarray) -> PartitionTree:
        """Copy of the tree with ``part`` split off ``cell`` at level n and below."""
        part = set(int(i) for i in part)
        labels = [lab.copy() for lab in self.labels]
        for k in range(n, self.depth + 1):
            flag = np.array([i in part for i in range(self.m)], dtype=np.intp)
            labels[k] = _refine(labels[k], flag)
        return PartitionTree(labels, self.certificates)

    # functionals -----------------------------------------------------

    def level_diameters(self, n: int, dist) -> np.ndarray:
        """Per point, the diameter of its level-n cell under ``dist``."""
        D = _entries(dist)
        lab = self.labels[min(n, self.depth)]
        if n > self.depth and not self.is_terminal():
            raise UsageError(f"level {n} beyond a non-terminal tree of depth {self.depth}")
        out = np.zeros(self.m)
        for c in range(int(lab.max()) + 1):
            idx = np.flatnonzero(lab == c)
            if idx.size > 1:
                out[idx] = D[np.ix_(idx, idx)].max()
        return out

    def chain_sums(self, fam: DistanceFamily, tau: int) -> np.ndarray:
        """Per point t, sum_n Delta_{n+tau}(A_n(t)) over the stored levels."""
        total = np.zeros(self.m)
        for n in range(self.depth + 1):
            total += self.level_diameters(n, fam.level(n + tau))
        return total

    # export ----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "levels": [
                {
                    "level": n,
                    "cells": [c.tolist() for c in self.cells(n)],
                    "representatives": self.reps[n].tolist(),
                }
                for n in range(self.depth + 1)
            ]
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> PartitionTree:
        levels = sorted(doc["levels"], key=lambda L: L["level"])
        m = sum(len(c) for c in levels[0]["cells"])
        labels = []
        for L in levels:
            lab = np.full(m, -1, dtype=np.intp)
            for c, members in enumerate(L["cells"]):
                lab[members] = c
            if np.any(lab < 0):
                raise StructuralError(f"level {L['level']} does not partition the point set")
            labels.append(lab)
        return cls(labels)

    def summary_csv(self, fam: DistanceFamily | None = None, tau: int = 0) -> str:
        """CSV (level, cell_count, max_diameter), diameters under q_{n+tau}."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "cell_count", "max_diameter"])
        for n in range(self.depth + 1):
            diam = float(self.level_diameters(n, fam.level(n + tau)).max()) if fam is not None else ""
            w.writerow([n, self.cell_count(n), repr(diam) if fam is not None else ""])
        return buf.getvalue()


def partition_from_entropy(T: PointSet, fam: DistanceFamily, tau: int, method: str = "auto") -> PartitionTree:
    """Tree whose level n intersects the entropy covers of levels 0..n-1.

    Certificate: every level-n cell A lies in one ball of cover n-1, so
    Delta_{n+tau-1}(A) <= 2 e^tau_{n-1}.
    """
    m = len(T)
    covers = []
    n = 0
    depth = entropy_depth(m)
    while True:
        cov = cover_engine(fam.level(n + tau), method).cover_with(level_capacity(n, m))
        covers.append(cov)
        # pseudo-metrics can reach radius 0 before every point is a center
        if cov.size == m or (cov.radius == 0 and n >= depth):
            break
        n += 1
    tree = PartitionTree.from_assignments(m, [c.assignment for c in covers])
    if not tree.is_terminal():
        tree = PartitionTree(tree.labels + [np.arange(m, dtype=np.intp)])
    e = np.array([c.radius for c in covers])
    checks = []
    for k in range(1, tree.depth + 1):
        worst = float(tree.level_diameters(k, fam.level(k + tau - 1)).max())
        # the closing singleton level (if appended) has no cover of its own
        bound = 2 * float(e[k - 1]) if k - 1 < len(e) else 0.0
        ok = worst <= bound + CERT_TOL
        checks.append({"level": k, "max_diameter": worst, "bound": bound, "ok": bool(ok)})
        if not ok:
            raise ConsistencyError(f"diameter certificate failed at level {k}")
    tree.certificates = {"entropy": e.tolist(), "tau": tau, "diameter": checks, "exact": covers[0].exact}
    tree.validate()
    return tree


def gamma_functional(tree: PartitionTree, fam: DistanceFamily, tau: int) -> float:
    """sup_t sum_n Delta_{n+tau}(A_n(t)) for this tree (an upper bound on gamma^tau)."""
    if tau < 0:
        raise UsageError("tau must be >= 0")
    if fam.n_max is not None and tree.depth + tau > fam.n_max:
        raise UsageError(f"tree depth {tree.depth} + tau {tau} exceeds family n_max {fam.n_max}")
    return float(tree.chain_sums(fam, tau).max())


# ----------------------------------------------------------------------------
# gamma_2, gamma_1, Dudley


def gamma_scaled_family(T: PointSet, d: DistanceMatrix, alpha: int) -> DistanceFamily:
    """q_n = 2^{n/alpha} d."""
    return scaled_family(T, d, lambda n: 2.0 ** (n / alpha))


def gamma_alpha_upper(T: PointSet, d: DistanceMatrix, alpha: int, method: str = "auto") -> tuple[float, PartitionTree]:
    """sup_t sum_n 2^{n/alpha} Delta(A_n(t)) over the entropy tree of d."""
    fam = gamma_scaled_family(T, d, alpha)
    tree = partition_from_entropy(T, fam, 0, method)
    return gamma_functional(tree, fam, 0), tree


def gamma2_upper(T: PointSet, d: DistanceMatrix | None = None, method: str = "auto") -> float:
    d = canonical_distance(T) if d is None else d
    return gamma_alpha_upper(T, d, 2, method)[0]


def gamma1_upper(T: PointSet, d: DistanceMatrix, method: str = "auto") -> float:
    return gamma_alpha_upper(T, d, 1, method)[0]


def plain_entropy(T: PointSet, d: DistanceMatrix, method: str = "auto") -> np.ndarray:
    """e_n for n up to the first level where it vanishes."""
    eng = cover_engine(d, method)
    m = len(T)
    return np.array([eng.radius_with(level_capacity(n, m)) for n in range(entropy_depth(m) + 1)])


def dudley_sum(T: PointSet, d: DistanceMatrix | None = None, alpha: int = 2, method: str = "auto") -> float:
    """sum_n 2^{n/alpha} e_n (alpha = 2 is the usual Dudley sum)."""
    d = canonical_distance(T) if d is None else d
    e = plain_entropy(T, d, method)
    return float(sum(2.0 ** (n / alpha) * x for n, x in enumerate(e)))


def dudley_integral(T: PointSet, d: DistanceMatrix | None = None, method: str = "auto") -> float:
    """int_0^inf sqrt(ln N(T, d, eps)) d eps, exact for the step function N."""
    d = canonical_distance(T) if d is None else d
    eng = cover_engine(d, method)
    r = eng.kradius
    total = 0.0
    # N(eps) = k on [r_k, r_{k-1})
    for k in range(2, len(r)):
        width = r[k - 1] - r[k]
        if width > 0:
            total += math.sqrt(math.log(k)) * width
    return float(total)


GAMMA2_DUDLEY_CONSTANT = 2.0 + 2.0 * math.sqrt(2.0)


# ----------------------------------------------------------------------------
# combined partitions


def combined_partition(F: PointSet, d1: DistanceMatrix, d2: DistanceMatrix, tau: int = 0, method: str = "auto"):
    """A_0 = {F}, A_n = A^1_{n-1} cap A^2_{n-1}, from the entropy trees for gamma_1(d1), gamma_2(d2).

    Since A_n(f) lies in A^i_{n-1}(f), shifting the index gives
    sum_n 2^{n/i} Delta_i(A_n(f)) <= Delta_i(F) + 2^{1/i} val_i, which is
    recorded as the certificate for i = 1, 2.
    """
    m = len(F)
    if d1.size != m or d2.size != m:
        raise StructuralError("both metrics must live on F")
    fam1 = gamma_scaled_family(F, d1, 1)
    fam2 = gamma_scaled_family(F, d2, 2)
    t1 = partition_from_entropy(F, fam1, tau, method)
    t2 = partition_from_entropy(F, fam2, tau, method)
    labels = [np.zeros(m, dtype=np.intp)]
    L = max(t1.depth, t2.depth)
    for n in range(L + 1):
        a = t1.labels[min(n, t1.depth)]
        b = t2.labels[min(n, t2.depth)]
        labels.append(_refine(a, b))
        if labels[-1].max() + 1 == m:
            break
    tree = PartitionTree(labels)
    tree.validate()
    val1 = gamma_functional(t1, fam1, tau)
    val2 = gamma_functional(t2, fam2, tau)
    s1 = float(tree.chain_sums(gamma_scaled_family(F, d1, 1), 0).max())
    s2 = float(tree.chain_sums(gamma_scaled_family(F, d2, 2), 0).max())
    b1 = d1.diameter() + 2.0 * val1
    b2 = d2.diameter() + math.sqrt(2.0) * val2
    tree.certificates = {
        "gamma1_tree": val1,
        "gamma2_tree": val2,
        "sum1": s1,
        "sum2": s2,
        "bound1": b1,
        "bound2": b2,
        "ok": bool(s1 <= b1 + 1e-9 and s2 <= b2 + 1e-9),
    }
    if not tree.certificates["ok"]:
        raise ConsistencyError("combined partition certificate failed")
    return tree


def save_tree(tree: PartitionTree, path: str | Path) -> None:
    Path(path).write_text(tree.to_json() + "\n")

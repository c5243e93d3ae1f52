"""Exhaustive reference implementations shared by the unit and acceptance tests."""
import itertools

import numpy as np

from chainkit.core import SetFamily


def brute_vc(fam: SetFamily) -> int:
    traces = [set(s) for s in fam.sets()]
    best = 0
    for k in range(1, fam.ground_size + 1):
        hit = False
        for B in itertools.combinations(range(fam.ground_size), k):
            got = {frozenset(t & set(B)) for t in traces}
            if len(got) == 1 << k:
                hit = True
                break
        if not hit:
            break
        best = k
    return best


def brute_shatter(a: np.ndarray, eps: float) -> int:
    m, d = a.shape
    best = 0
    for k in range(1, d + 1):
        found = False
        for J in itertools.combinations(range(d), k):
            for v in itertools.product(*[np.unique(a[:, i]) for i in J]):
                ok = True
                for A in itertools.product((True, False), repeat=k):
                    if not any(
                        all((a[u, i] <= vi) if inA else (a[u, i] >= vi + eps) for inA, i, vi in zip(A, J, v)) for u in range(m)
                    ):
                        ok = False
                        break
                if ok:
                    found = True
                    break
            if found:
                break
        if not found:
            break
        best = k
    return best


def brute_covering_number(D, eps):
    m = D.shape[0]
    for k in range(1, m + 1):
        for c in itertools.combinations(range(m), k):
            if np.all(D[:, list(c)].min(axis=1) <= eps):
                return k
    raise AssertionError


def brute_kradius(D, k):
    return min(D[:, list(c)].min(axis=1).max() for c in itertools.combinations(range(D.shape[0]), k))

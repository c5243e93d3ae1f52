"""Quadrature oracle for the Gaussian quantile constants a*_n.

a*_n solves E(|Z|/a - 1)_+ = 2^{-2^n} (2^{-1} read as 1 at n = 0 is not used:
N_0 = 1). The expectation is integrated with mpmath at 60 digits and the root
bracketed by bisection on the log scale, independently of the library's erfcx/bisection route.
Writes quantile_band.json next to this file.
"""
from __future__ import annotations

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 60


def log_excess(a):
    # z = a + s: (z/a - 1) phi(z) = (s/a) phi(a) exp(-a s - s^2/2)
    f = lambda s: s * mp.exp(-a * s - s * s / 2)
    pts = [0, 1 / a, 4 / a, 16 / a, 64 / a, mp.inf]
    return mp.log(2 * mp.npdf(a) / a) + mp.log(mp.quad(f, pts))


def a_star(n: int):
    target = mp.mpf(0) if n == 0 else -(mp.mpf(2) ** n) * mp.log(2)
    lo, hi = mp.log(mp.mpf("0.05")), mp.log(mp.mpf(200))
    for _ in range(120):
        mid = (lo + hi) / 2
        if log_excess(mp.e**mid) > target:
            lo = mid
        else:
            hi = mid
    return mp.e ** ((lo + hi) / 2)


def main():
    a = {n: a_star(n) for n in range(0, 12)}
    ratios = {n: a[n] / mp.mpf(2) ** (mp.mpf(n) / 2) for n in range(2, 9)}
    doc = {
        "a_star": {str(n): mp.nstr(v, 30) for n, v in a.items()},
        "levels": list(range(2, 9)),
        "sigmas": [0.1, 1.0, 10.0],
        "band": [float(min(ratios.values())), float(max(ratios.values()))],
        "ratios": {str(n): float(v) for n, v in ratios.items()},
    }
    out = Path(__file__).with_name("quantile_band.json")
    out.write_text(json.dumps(doc, indent=1) + "\n")
    print(json.dumps(doc, indent=1))


if __name__ == "__main__":
    main()

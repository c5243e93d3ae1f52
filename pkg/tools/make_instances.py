"""Regenerate the bundled instance files under src/chainkit/instances."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from chainkit.core import PointSet, SetFamily
from chainkit.vc import circle_points, sphere_directions

OUT = Path(__file__).resolve().parents[1] / "src" / "chainkit" / "instances"


def pts(a) -> dict:
    return PointSet.from_points(np.asarray(a)).to_dict()


def gauss_points(seed: int, k: int, d: int) -> np.ndarray:
    return np.random.default_rng(seed).normal(size=(k, d)) / np.sqrt(d)


def instances() -> dict[str, dict]:
    r = np.random.default_rng(2024)
    x = np.round(r.uniform(0.2, 1.0, 8), 6)
    y = np.round(r.uniform(0.2, 1.0, 8), 6)
    chars = np.round(r.normal(size=(12, 6)) + 1j * r.normal(size=(12, 6)), 6) / np.sqrt(12)
    interval_sets = [[]] + [list(range(i, j)) for i in range(6) for j in range(i + 1, 7)]
    out = {
        "singleton": {"description": "one point at the origin", "T": pts(np.zeros((1, 3)))},
        "two_point": {"description": "two points at distance 1.5", "T": pts([[0.0, 0.0], [1.5, 0.0]])},
        "gauss12": {"description": "12 Gaussian points in R^10, coordinates N(0, 1/10)", "model": "gaussian", "T": pts(gauss_points(12, 12, 10))},
        "bern12": {"description": "12 Gaussian points in R^10 under Rademacher noise", "model": "bernoulli", "T": pts(gauss_points(13, 12, 10))},
        "product2x2": {"description": "U = {0, u}, T = {0, t}", "U": pts([[0.0, 0.0], [1.0, 2.0]]), "T": pts([[0.0, 0.0], [0.5, -1.0]])},
        "product8x8": {"description": "8 by 8 Gaussian product index set in R^6", "U": pts(np.random.default_rng(88).normal(size=(8, 6))), "T": pts(np.random.default_rng(89).normal(size=(8, 6)))},
        "ellipsoid8": {
            "description": "axes x, y in R^8; T for the one-sided ellipsoid bounds; t list for the entropy bound",
            "x": x.tolist(),
            "y": y.tolist(),
            "T": pts(np.vstack([np.zeros(8), np.round(r.normal(size=(6, 8)), 6)])),
            "t": np.round(r.normal(size=(4, 8)), 6).tolist(),
        },
        "cube2": {"description": "cube covers of the unit ball in R^2, all regimes", "N": 2, "regimes": ["low", "middle", "high"]},
        "cube3": {"description": "cube covers of the unit ball in R^3, all regimes", "N": 3, "regimes": ["low", "middle", "high"]},
        "cube4": {"description": "cube covers of the unit ball in R^4, all regimes", "N": 4, "regimes": ["low", "middle", "high"]},
        "circle64": {"description": "64 points on the unit circle", "U": circle_points(64).to_dict(), "eps": [1.9, 1.5, 1.2, 1.05], "expected": "unit-ball"},
        "sphere98": {"description": "98 directions on the unit sphere in R^3", "U": sphere_directions(3).to_dict(), "eps": [1.9, 1.5, 1.2, 1.05], "expected": "unit-ball"},
        "circle_integral": {"description": "shattering integral of the circle grid", "U": circle_points(64).to_dict(), "eps_grid": [0.05 * k for k in range(1, 21)]},
        "shattered4": {"description": "power set of 4 coordinates, T = all-ones", "family": SetFamily.power_set(4, range(4)).to_dict(), "T": pts(np.ones((1, 4)))},
        "shattered9": {"description": "power set of 9 coordinates, T = all-ones", "family": SetFamily.power_set(9, range(9)).to_dict(), "T": pts(np.ones((1, 9)))},
        "intervals6": {"description": "discrete intervals on 6 points", "family": {"ground_size": 6, "members": interval_sets}},
        "characters16": {"description": "12 complex points, Z_16 characters with 6 frequencies", "T": pts(chars), "m": 16, "freqs": [1, 2, 3, 5, 7, 11]},
        "trivial_group": {"description": "the same points on the trivial group", "T": pts(chars), "m": 1, "freqs": [0] * 6},
        "l1_ball": {"description": "vertices of the l1 ball in R^6", "T": pts(np.vstack([np.eye(6), -np.eye(6)])), "decomposition": "identity"},
        "lipschitz16": {"description": "16 bounded Lipschitz functions on [0,1]^2", "family": {"catalog": "lipschitz", "size": 16, "dim": 2, "seed": 0}, "N": [16, 64, 256]},
        "tails6": {
            "description": "contraction of 6 vectors in R^3 by the cube vertices",
            "U": pts(np.array([[a, b, c, d, e, f] for a in (-1, 1) for b in (-1, 1) for c in (-1, 1) for d in (1,) for e in (1,) for f in (1,)], dtype=float)),
            "vectors": np.round(np.random.default_rng(6).normal(size=(6, 3)), 6).tolist(),
            "t_grid": [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0],
        },
    }
    for k, v in out.items():
        v["instance_id"] = k
    return out


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, doc in instances().items():
        (OUT / f"{name}.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
        print(name)


if __name__ == "__main__":
    main()

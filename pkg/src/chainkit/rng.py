"""Counter-based random streams with chunk-level substreams.

Sample j * CHUNK .. (j + 1) * CHUNK - 1 of a run with seed s is drawn from a
Philox generator keyed by s + (j << 64), so any chunk can be produced
independently and results do not depend on how chunks are scheduled. Normals
come from the inverse CDF applied to 53-bit uniforms taken from raw 64-bit
outputs, which keeps the mapping fixed across numpy releases.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np
from scipy import special

CHUNK = 4096
_MASK64 = (1 << 64) - 1
_TWO53 = float(1 << 53)


def _key(seed: int, j: int) -> int:
    return (int(seed) & _MASK64) + (int(j) << 64)


def raw_words(seed: int, j: int, size: int) -> np.ndarray:
    bg = np.random.Philox(key=_key(seed, j))
    return bg.random_raw(size)


def uniforms(seed: int, j: int, shape) -> np.ndarray:
    """Uniforms (k + 1/2) / 2^53 in the open unit interval."""
    size = int(np.prod(shape))
    k = raw_words(seed, j, size) >> np.uint64(11)
    return ((k.astype(np.float64) + 0.5) / _TWO53).reshape(shape)


def normals(seed: int, j: int, shape) -> np.ndarray:
    return special.ndtri(uniforms(seed, j, shape))


def signs(seed: int, j: int, shape) -> np.ndarray:
    """Rademacher +/-1 from the top bit of each raw word."""
    size = int(np.prod(shape))
    top = (raw_words(seed, j, size) >> np.uint64(63)).astype(np.float64)
    return (2.0 * top - 1.0).reshape(shape)


NOISE = {"gaussian": normals, "bernoulli": signs, "uniform": uniforms}


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("CHAINKIT_THREADS", "1")))
    except ValueError:
        return 1


def chunk_sizes(samples: int) -> list[int]:
    full, rest = divmod(samples, CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def map_chunks(
    samples: int,
    seed: int,
    work: Callable[[int, int], np.ndarray],
    threads: int | None = None,
) -> np.ndarray:
    """Concatenate ``work(j, size)`` over chunks, in chunk order."""
    sizes = chunk_sizes(samples)
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(sizes) <= 1:
        parts = [work(j, n) for j, n in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda jn: work(*jn), enumerate(sizes)))
    return np.concatenate(parts) if parts else np.zeros(0)


def sample_functional(
    noise: str,
    dim: int,
    fn: Callable[[np.ndarray], np.ndarray],
    samples: int,
    seed: int,
    threads: int | None = None,
) -> np.ndarray:
    """Per-draw values fn(noise block) for ``samples`` draws of a ``dim``-vector."""
    draw = NOISE[noise]

    def work(j: int, n: int) -> np.ndarray:
        return np.asarray(fn(draw(seed, j, (n, dim))), dtype=np.float64)

    return map_chunks(samples, seed, work, threads)

"""Counter-based deterministic random numbers on integer lattices.

The detector and the synthetic generator both need per-site randomness
(site = pixel coordinates plus a frame index and a word slot) that does not
depend on the order sites are visited in.  A counter-based construction gives
that for free: every site hashes (seed, field, field, ...) straight to 64
random bits, so vectorized, chunked and scalar evaluation all agree bit for
bit.

The mixer is the splitmix64 finalizer, applied once per key field.  All
arithmetic is uint64 with wraparound.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _mix(h: np.ndarray) -> np.ndarray:
    h = (h ^ (h >> np.uint64(30))) * _MIX1
    h = (h ^ (h >> np.uint64(27))) * _MIX2
    return h ^ (h >> np.uint64(31))


def lattice_hash(seed: int, *fields) -> np.ndarray:
    """Hash (seed, *fields) to uint64.  Fields broadcast like numpy operands.

    Scalar fields give a 0-d array; pass at least one array field to get a
    lattice of independent values.
    """
    with np.errstate(over="ignore"):
        h = _mix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + _GOLDEN)
        for f in fields:
            f = np.asarray(f)
            if f.dtype != np.uint64:
                f = f.astype(np.int64).astype(np.uint64)
            h = _mix((h ^ f) + _GOLDEN)
    return h


def lattice_uniform(seed: int, *fields) -> np.ndarray:
    """Uniform floats in [0, 1) keyed by (seed, *fields)."""
    h = lattice_hash(seed, *fields)
    return (h >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


def lattice_randint(seed: int, n: int, *fields) -> np.ndarray:
    """Integers in [0, n) keyed by (seed, *fields).

    Uses the modulo reduction; the bias is ~n/2**64 and irrelevant next to
    determinism, which is the point.
    """
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    h = lattice_hash(seed, *fields)
    return (h % np.uint64(n)).astype(np.int64)

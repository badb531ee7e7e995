"""Counter-based deterministic random numbers.

A small splitmix64-style mixer keyed by integer tuples. Bit-reproducible
across platforms and independent of draw order, which is what the test
ensembles and switching-phase schedules need.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _mix(x: np.ndarray) -> np.ndarray:
    x = (x + _GOLDEN).astype(np.uint64)
    z = x
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def counter_uint64(*keys: np.ndarray | int) -> np.ndarray:
    """Mix integer keys (broadcast together) into uint64 words."""
    with np.errstate(over="ignore"):
        state = np.uint64(0)
        for k in keys:
            arr = np.asarray(k, dtype=np.int64).astype(np.uint64)
            state = _mix(state ^ (arr * _MIX2))
        return _mix(state)


def counter_uniform(*keys: np.ndarray | int) -> np.ndarray:
    """Uniform floats in (0, 1), open at both ends."""
    bits = counter_uint64(*keys)
    return (bits >> np.uint64(11)).astype(np.float64) / float(1 << 53) + 2.0**-54


def counter_normal_pair(*keys: np.ndarray | int) -> tuple[np.ndarray, np.ndarray]:
    """Two independent standard normals per key tuple (Box-Muller)."""
    u1 = counter_uniform(np.int64(0), *keys)
    u2 = counter_uniform(np.int64(1), *keys)
    r = np.sqrt(-2.0 * np.log(u1))
    return r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)

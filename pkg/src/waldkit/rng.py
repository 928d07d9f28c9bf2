"""Deterministic, splittable random streams for the Monte Carlo layer.

Draw ``i`` of a run always comes from the same place in a counter-based
(Philox) stream keyed by ``(seed, lane)``: draws are produced in fixed
blocks of :data:`BLOCK` rows, block ``j`` of lane ``lane`` using the key
``[seed, lane * LANE_STRIDE + j]``.  Any worker computing block ``j``
produces identical rows, so results never depend on how draws are split
across workers, and redraw rounds use fresh lanes without disturbing the
primary stream.

Uniforms are 53-bit, strictly inside ``(0, 1)``; normal variates come from
the inverse normal CDF applied to them, which is reproducible across
platforms.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

BLOCK = 8192
LANE_STRIDE = 1 << 32
_MASK64 = (1 << 64) - 1
_INV53 = 2.0**-53


def _block_generator(seed: int, lane: int, block: int) -> np.random.Generator:
    if block >= LANE_STRIDE:
        raise ValueError("block index exceeds the lane stride")
    key = [seed & _MASK64, (lane * LANE_STRIDE + block) & _MASK64]
    return np.random.Generator(np.random.Philox(key=key))


def uniform_matrix(seed: int, n: int, width: int, lane: int = 0) -> np.ndarray:
    """``(n, width)`` uniforms in the open interval (0, 1)."""
    out = np.empty((n, width))
    for j in range((n + BLOCK - 1) // BLOCK):
        lo, hi = j * BLOCK, min((j + 1) * BLOCK, n)
        gen = _block_generator(seed, lane, j)
        ints = gen.integers(0, 1 << 53, size=(hi - lo, width))
        out[lo:hi] = (ints.astype(np.float64) + 0.5) * _INV53
    return out


def normal_matrix(seed: int, n: int, width: int, lane: int = 0) -> np.ndarray:
    """``(n, width)`` standard normals via the inverse-CDF method."""
    return ndtri(uniform_matrix(seed, n, width, lane))

"""Pure-numpy implementations of the hot kernels.

Same contracts as the compiled module: masks are packed little-endian into
uint64 words (see ``pack_mask``), perturbation mutates its block in place.
"""

from __future__ import annotations

import numpy as np

_POPCOUNT8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint32)


def and_popcount(masks: np.ndarray) -> int:
    """Number of set bits in the AND of all rows of a packed (m, W) array."""
    if masks.ndim != 2:
        raise ValueError("masks must be 2-dimensional")
    if masks.shape[0] == 0:
        return 0
    acc = masks[0].copy()
    for i in range(1, masks.shape[0]):
        np.bitwise_and(acc, masks[i], out=acc)
    return int(_POPCOUNT8[acc.view(np.uint8)].sum())


def and_into(a: np.ndarray, b: np.ndarray, out: np.ndarray) -> int:
    """out = a & b over packed words; returns the popcount of the result."""
    if a.shape != b.shape or a.shape != out.shape:
        raise ValueError("word arrays must have matching lengths")
    np.bitwise_and(a, b, out=out)
    return int(_POPCOUNT8[out.view(np.uint8)].sum())


def perturb_block(block: np.ndarray, col: int, deltas: np.ndarray,
                  lo: float, hi: float) -> None:
    """Add per-row deltas to one column of ``block``, clamped to [lo, hi]."""
    if block.shape[0] != deltas.shape[0]:
        raise ValueError("deltas length must match block rows")
    column = block[:, col]
    column += deltas
    np.clip(column, lo, hi, out=column)

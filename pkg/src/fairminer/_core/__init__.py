"""Kernel backend selection.

The compiled extension is preferred when it built; the numpy fallback is
contract-identical. Set FAIRMINER_PURE_PYTHON=1 to force the fallback (the
parity tests and the benchmark do this).
"""

from __future__ import annotations

import os

import numpy as np

from fairminer._core import fallback

if os.environ.get("FAIRMINER_PURE_PYTHON"):
    _impl = fallback
    BACKEND = "python"
else:
    try:
        from fairminer._core import _speedups as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = fallback
        BACKEND = "python"

and_popcount = _impl.and_popcount
and_into = _impl.and_into
perturb_block = _impl.perturb_block


def pack_mask(mask: np.ndarray) -> np.ndarray:
    """Pack a boolean vector into little-endian uint64 words, zero padded.

    Bit j of word w corresponds to element 64*w + j, so AND and popcount
    over words agree with intersection and cardinality over elements.
    """
    bits = np.packbits(np.ascontiguousarray(mask, dtype=bool), bitorder="little")
    pad = (-bits.size) % 8
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    return np.ascontiguousarray(bits).view(np.uint64)


__all__ = ["BACKEND", "and_popcount", "and_into", "perturb_block", "pack_mask", "fallback"]

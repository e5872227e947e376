import os
import subprocess
import sys

import numpy as np
import pytest

from fairminer import _core
from fairminer._core import fallback

try:
    from fairminer._core import _speedups
except ImportError:
    _speedups = None

BACKENDS = [("python", fallback)] + \
    ([("compiled", _speedups)] if _speedups else [])


def random_masks(rng, n_masks, n_bits):
    bools = rng.random((n_masks, n_bits)) < rng.random((n_masks, 1))
    packed = np.stack([_core.pack_mask(row) for row in bools])
    return bools, packed


@pytest.mark.parametrize("name,impl", BACKENDS, ids=[b[0] for b in BACKENDS])
def test_and_popcount_matches_numpy(name, impl):
    rng = np.random.default_rng(1)
    for n_bits in (1, 63, 64, 65, 1000, 4096):
        for n_masks in (1, 2, 5):
            bools, packed = random_masks(rng, n_masks, n_bits)
            expected = int(np.logical_and.reduce(bools, axis=0).sum())
            assert impl.and_popcount(packed) == expected


@pytest.mark.parametrize("name,impl", BACKENDS, ids=[b[0] for b in BACKENDS])
def test_and_into_matches_numpy(name, impl):
    rng = np.random.default_rng(2)
    bools, packed = random_masks(rng, 2, 777)
    out = np.empty_like(packed[0])
    count = impl.and_into(packed[0], packed[1], out)
    assert count == int((bools[0] & bools[1]).sum())
    assert (out == (packed[0] & packed[1])).all()


@pytest.mark.parametrize("name,impl", BACKENDS, ids=[b[0] for b in BACKENDS])
def test_and_into_rejects_length_mismatch(name, impl):
    a = np.zeros(4, dtype=np.uint64)
    b = np.zeros(5, dtype=np.uint64)
    with pytest.raises(ValueError):
        impl.and_into(a, b, np.empty_like(a))
    with pytest.raises(ValueError):
        impl.and_into(a, a, np.empty(3, dtype=np.uint64))


@pytest.mark.parametrize("name,impl", BACKENDS, ids=[b[0] for b in BACKENDS])
def test_perturb_block_clamps_and_adds(name, impl):
    rng = np.random.default_rng(3)
    block = np.ascontiguousarray(rng.uniform(0, 80, size=(200, 4)))
    deltas = rng.choice([-1.0, 0.0, 1.0], size=200)
    expected = block.copy()
    expected[:, 2] = np.clip(expected[:, 2] + deltas, 5.0, 75.0)
    impl.perturb_block(block, 2, deltas, 5.0, 75.0)
    assert np.array_equal(block, expected)


def test_backends_agree_on_random_inputs():
    if _speedups is None:
        pytest.skip("compiled extension not built")
    rng = np.random.default_rng(4)
    for _ in range(25):
        n_bits = int(rng.integers(1, 3000))
        n_masks = int(rng.integers(1, 6))
        _, packed = random_masks(rng, n_masks, n_bits)
        assert fallback.and_popcount(packed) == _speedups.and_popcount(packed)
    block_a = np.ascontiguousarray(rng.uniform(-5, 5, size=(300, 3)))
    block_b = block_a.copy()
    deltas = rng.choice([-0.01, 0.01], size=300)
    fallback.perturb_block(block_a, 1, deltas, -4.5, 4.5)
    _speedups.perturb_block(block_b, 1, deltas, -4.5, 4.5)
    assert np.array_equal(block_a, block_b)


def test_pack_mask_pads_to_word_multiples():
    for n in (1, 7, 64, 65, 129, 512):
        mask = np.ones(n, dtype=bool)
        packed = _core.pack_mask(mask)
        assert packed.dtype == np.uint64
        assert packed.size == (n + 63) // 64
        # padding bits are zero: total popcount equals n
        assert _core.and_popcount(packed[np.newaxis, :]) == n


def test_pack_mask_bit_positions():
    mask = np.zeros(130, dtype=bool)
    mask[[0, 63, 64, 129]] = True
    packed = _core.pack_mask(mask)
    assert packed[0] == (1 | (1 << 63))
    assert packed[1] == 1
    assert packed[2] == (1 << 1)


def test_env_var_forces_python_backend():
    env = dict(os.environ, FAIRMINER_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from fairminer._core import BACKEND; print(BACKEND)"],
        capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"


def test_compiled_backend_is_active_when_built():
    if _speedups is None:
        pytest.skip("compiled extension not built")
    if os.environ.get("FAIRMINER_PURE_PYTHON"):
        assert _core.BACKEND == "python"
    else:
        assert _core.BACKEND == "compiled"

"""Compare the compiled kernels against the pure-numpy fallback.

Run after an editable install:

    python3 benchmarks/bench_kernels.py [--rows 1000000] [--sets 64] [--repeat 5]

Measures the two hot paths: AND+popcount over packed rule masks (support
counting during mining) and in-place block perturbation (structured sample
generation). Both backends run on identical inputs and results are
asserted equal before timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from fairminer._core import fallback, pack_mask

try:
    from fairminer._core import _speedups
except ImportError:
    _speedups = None


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_popcount(rows: int, sets: int, repeat: int, rng) -> list[tuple[str, float]]:
    masks = np.vstack([pack_mask(rng.random(rows) < 0.5) for _ in range(3)])
    single = np.ascontiguousarray(masks[:1])
    out = np.empty_like(masks[0])

    want = fallback.and_popcount(masks)
    if _speedups is not None:
        assert _speedups.and_popcount(masks) == want
        assert _speedups.and_into(masks[0], masks[1], out) == \
            fallback.and_into(masks[0], masks[1], out.copy())

    results = []
    for name, mod in (("numpy", fallback),) + ((("compiled", _speedups),) if _speedups else ()):
        def run(mod=mod):
            for _ in range(sets):
                mod.and_popcount(masks)
                mod.and_popcount(single)
                mod.and_into(masks[0], masks[2], out)
        results.append((name, _time(run, repeat)))
    return results


def bench_perturb(rows: int, repeat: int, rng) -> list[tuple[str, float]]:
    base = rng.uniform(0.0, 80.0, size=(rows, 6))
    deltas = np.where(rng.random(rows) < 0.5, 1.0, -1.0)

    checks = {}
    for name, mod in (("numpy", fallback),) + ((("compiled", _speedups),) if _speedups else ()):
        block = base.copy()
        mod.perturb_block(block, 2, deltas, 0.0, 80.0)
        checks[name] = block
    if _speedups is not None:
        assert np.array_equal(checks["numpy"], checks["compiled"])

    results = []
    for name, mod in (("numpy", fallback),) + ((("compiled", _speedups),) if _speedups else ()):
        block = base.copy()

        def run(mod=mod, block=block):
            mod.perturb_block(block, 2, deltas, 0.0, 80.0)
        results.append((name, _time(run, repeat)))
    return results


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=1_000_000)
    parser.add_argument("--sets", type=int, default=64)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    if _speedups is None:
        print("compiled extension not available; timing the fallback only")

    print(f"mask AND+popcount over {args.rows} rows x 3 masks, {args.sets} rule sets:")
    rows = bench_popcount(args.rows, args.sets, args.repeat, rng)
    base = dict(rows)["numpy"]
    for name, t in rows:
        print(f"  {name:>8}: {t * 1e3:8.2f} ms   ({base / t:4.1f}x vs numpy)")

    print(f"block perturbation over {args.rows} rows:")
    rows = bench_perturb(args.rows, args.repeat, rng)
    base = dict(rows)["numpy"]
    for name, t in rows:
        print(f"  {name:>8}: {t * 1e3:8.2f} ms   ({base / t:4.1f}x vs numpy)")


if __name__ == "__main__":
    main()

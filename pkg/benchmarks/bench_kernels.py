"""Compare the numba and pure-numpy kernel backends.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3] [--quick]

Each case runs once per backend to warm up (numba compiles or loads its
cache), then reports the best of ``--repeat`` timed runs and checks that both
backends return the same result.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from rvbggm import LatticeSpec, backend, build_rvb, enumerate_coverings
from rvbggm import _kernels
from rvbggm._jit import HAVE_NUMBA
from rvbggm.dmrm import pair_correlation


def _covering_arrays(spec):
    covs = enumerate_coverings(spec)
    a = np.array([[bond[0] for bond in c.bonds] for c in covs], dtype=np.int64)
    b = np.array([[bond[1] for bond in c.bonds] for c in covs], dtype=np.int64)
    return a, b


def cases(quick: bool):
    spec = LatticeSpec(4, 4, "ph") if not quick else LatticeSpec(4, 3, "ph")
    a, b = _covering_arrays(spec)
    yield f"expand_coverings {spec.label}", lambda: _kernels.expand_coverings(a, b)

    state = build_rvb(spec)
    keep = np.arange(spec.num_sites // 2, dtype=np.int64)
    rest = np.arange(spec.num_sites // 2, spec.num_sites, dtype=np.int64)
    position = np.arange(1 << keep.size, dtype=np.int64)
    yield (f"sector_density {spec.label} half", lambda: _kernels.sector_density(
        state.basis, state.amps.real, keep, rest, position))

    loop = LatticeSpec(4, 4, "ph") if quick else LatticeSpec(6, 6, "ph")
    yield f"loop-gas correlation {loop.label}", lambda: pair_correlation(loop, 0, 1)


def _best(fn, repeat: int):
    best, out = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def _same(x, y) -> bool:
    if isinstance(x, tuple):
        return all(_same(p, q) for p, q in zip(x, y))
    return bool(np.allclose(x, y, rtol=1e-10, atol=1e-12))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--quick", action="store_true", help="smaller inputs")
    args = parser.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not installed; only the numpy backend is available")
        return 1
    print(f"{'case':40s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}  agree")
    for name, fn in cases(args.quick):
        timings, outputs = {}, {}
        for which in ("numba", "numpy"):
            with backend(which):
                fn()
                timings[which], outputs[which] = _best(fn, args.repeat)
        speedup = timings["numpy"] / timings["numba"]
        agree = _same(outputs["numba"], outputs["numpy"])
        print(f"{name:40s} {timings['numba']:10.4f} {timings['numpy']:10.4f} {speedup:8.1f}  {agree}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

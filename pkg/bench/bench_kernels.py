"""Compare the compiled elimination kernels with the numpy fallback.

    python3 bench/bench_kernels.py [--sizes 64,128,256] [--repeat 3]

Both backends run on the same random matrices; results are checked for
agreement before timings are printed.
"""
import argparse
import time

import numpy as np

from ainf import _gfkernel_py

try:
    from ainf import _gfkernel
except ImportError:  # pragma: no cover - depends on the build
    _gfkernel = None


def _time(fn, mat, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        m = mat.copy()
        t0 = time.perf_counter()
        out = fn(m, *args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(sizes, repeat, p=2, n=3, seed=0):
    rng = np.random.default_rng(seed)
    rows = []
    for size in sizes:
        a = rng.integers(0, p, size=(size, size), dtype=np.int64)
        b = rng.integers(0, p**n, size=(size, size), dtype=np.int64)
        # make the Z/p^n case nontrivial: scale some rows by p
        b[: size // 3] = (b[: size // 3] * p) % p**n
        t_py, piv_py = _time(_gfkernel_py.rref_inplace, a, p, repeat=repeat)
        t_zpy, val_py = _time(_gfkernel_py.zpn_pivot_valuations, b, p, n, repeat=repeat)
        row = {"size": size, "rref_numpy": t_py, "zpn_numpy": t_zpy}
        if _gfkernel is not None:
            t_c, piv_c = _time(_gfkernel.rref_inplace, a, p, repeat=repeat)
            t_zc, val_c = _time(_gfkernel.zpn_pivot_valuations, b, p, n, repeat=repeat)
            if list(piv_c) != list(piv_py):
                raise AssertionError(f"rref pivots differ at size {size}")
            if sum(n - v for v in val_c) != sum(n - v for v in val_py):
                raise AssertionError(f"Z/p^n orders differ at size {size}")
            row.update(rref_cython=t_c, zpn_cython=t_zc)
        rows.append(row)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="64,128,256,512")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rows = bench(sizes, args.repeat)
    print(f"{'size':>6} {'rref numpy':>12} {'rref cython':>12} {'zpn numpy':>12} {'zpn cython':>12}")
    for r in rows:
        rc = f"{r['rref_cython']:.4f}" if "rref_cython" in r else "n/a"
        zc = f"{r['zpn_cython']:.4f}" if "zpn_cython" in r else "n/a"
        print(f"{r['size']:>6} {r['rref_numpy']:>12.4f} {rc:>12} {r['zpn_numpy']:>12.4f} {zc:>12}")


if __name__ == "__main__":
    main()

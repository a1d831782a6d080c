"""Compare the compiled kernels against the pure-numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeats N]

Both backends are imported directly, so the result is independent of the
MAGNIGLYPH_NO_EXT setting.  Outputs are checked for bit-identity before
any timing is reported.
"""

import argparse
import time

import numpy as np

from magniglyph._kernels import _pure

try:
    from magniglyph._kernels import _fast
except ImportError:
    _fast = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_bilinear(repeats):
    rng = np.random.default_rng(0)
    cases = [((64, 96), (96, 144)), ((240, 320), (360, 480)),
             ((480, 640), (720, 960))]
    for (h, w), (oh, ow) in cases:
        src = rng.random((h, w, 3)) * 255
        ref = _pure.bilinear_resample(src, oh, ow)
        t_pure = timeit(lambda: _pure.bilinear_resample(src, oh, ow), repeats)
        row = f"bilinear {w}x{h} -> {ow}x{oh}   pure {t_pure * 1e3:8.2f} ms"
        if _fast is not None:
            out = _fast.bilinear_resample(src, oh, ow)
            assert np.array_equal(out, ref), "backends disagree"
            t_fast = timeit(lambda: _fast.bilinear_resample(src, oh, ow),
                            repeats)
            row += (f"   compiled {t_fast * 1e3:8.2f} ms"
                    f"   speedup {t_pure / t_fast:5.2f}x")
        print(row)


def bench_diffuse(repeats):
    rng = np.random.default_rng(1)
    for h, w in [(64, 96), (128, 192), (256, 384)]:
        vals = rng.random((h, w, 3)) * 255
        hole = np.zeros((h, w), bool)
        hole[h // 4: 3 * h // 4, w // 4: 3 * w // 4] = rng.random(
            (h // 2, w - 2 * (w // 4))) < 0.6
        ref, n_ref = _pure.diffuse_fill(vals, hole, 400, 0.05)
        t_pure = timeit(lambda: _pure.diffuse_fill(vals, hole, 400, 0.05),
                        repeats)
        row = (f"diffuse  {w}x{h} ({int(hole.sum())} px, {n_ref} sweeps)"
               f"   pure {t_pure * 1e3:8.2f} ms")
        if _fast is not None:
            out, n_out = _fast.diffuse_fill(vals, hole, 400, 0.05)
            assert n_out == n_ref and np.array_equal(out, ref), \
                "backends disagree"
            t_fast = timeit(lambda: _fast.diffuse_fill(vals, hole, 400, 0.05),
                            repeats)
            row += (f"   compiled {t_fast * 1e3:8.2f} ms"
                    f"   speedup {t_pure / t_fast:5.2f}x")
        print(row)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    if _fast is None:
        print("compiled extension not available; timing pure backend only")
    bench_bilinear(args.repeats)
    bench_diffuse(args.repeats)


if __name__ == "__main__":
    main()

"""Compare the compiled kernels with the numpy fallback.

Runs the same benchmark protocol on each available backend, checks that the
decode outputs are identical, and prints per-decode latency and speedup.

    python benchmarks/compare_backends.py --code bb72 bb784 --batch 1 64
"""

from __future__ import annotations

import argparse
import sys

from qldpc_msa.benchmark import compare_backends
from qldpc_msa.codes import BUILTIN_CODES, builtin_code


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--code", nargs="+", default=["bb72", "bb144", "bb784"], choices=BUILTIN_CODES)
    ap.add_argument("--batch", type=int, nargs="+", default=[1, 64])
    ap.add_argument("--mode", nargs="+", default=["float", "int16"],
                    choices=("float", "int8", "int16"))
    ap.add_argument("--warmup", type=int, default=10)
    ap.add_argument("--measure", type=int, default=50)
    args = ap.parse_args(argv)

    print(f"{'code':>6} {'mode':>6} {'batch':>5} {'cython_us':>10} {'python_us':>10} "
          f"{'speedup':>8} outputs")
    mismatch = False
    for name in args.code:
        code = builtin_code(name)
        for mode in args.mode:
            for batch in args.batch:
                runs = compare_backends(code, mode=mode, batch=batch, warmup=args.warmup,
                                        measure=args.measure)
                if "cython" not in runs:
                    print("compiled backend not built; nothing to compare", file=sys.stderr)
                    return 1
                c, p = runs["cython"], runs["python"]
                same = c.digest() == p.digest()
                mismatch |= not same
                print(f"{name:>6} {mode:>6} {batch:>5} {c.record.mean_us:>10.1f} "
                      f"{p.record.mean_us:>10.1f} {p.record.mean_us / c.record.mean_us:>7.1f}x "
                      f"{'identical' if same else 'DIFFER'}")
    return 1 if mismatch else 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Measure dataset generation throughput for a few worker counts.

Usage: python scripts/bench_generate.py [--count N] [--workers 1 4] [--keep]
"""

import argparse
import shutil
import tempfile
import time
from pathlib import Path

from pluckgen.dataset import DatasetSpec, generate_dataset


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=25)
    parser.add_argument("--workers", type=int, nargs="+", default=[1, 4])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--keep", action="store_true",
                        help="keep the generated directories")
    args = parser.parse_args()

    base = Path(tempfile.mkdtemp(prefix="pluckgen_bench_"))
    print(f"generating {args.count} clips per run under {base}")
    try:
        for workers in args.workers:
            out = base / f"w{workers}"
            spec = DatasetSpec(clip_count=args.count, master_seed=args.seed,
                               output_dir=str(out))
            t0 = time.monotonic()
            manifest = generate_dataset(spec, workers=workers)
            elapsed = time.monotonic() - t0
            audio_s = sum(c["duration_s"] for c in manifest["clips"])
            print(f"workers={workers}: {elapsed:6.1f} s wall, "
                  f"{args.count / elapsed:5.1f} clips/s, "
                  f"{audio_s / elapsed:6.1f} s audio per s wall, "
                  f"{len(manifest['failures'])} failures")
    finally:
        if not args.keep:
            shutil.rmtree(base)


if __name__ == "__main__":
    main()

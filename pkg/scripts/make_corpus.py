#!/usr/bin/env python3
"""Generate a benchmark corpus: a directory of instance files (with
decomposition sidecars where the profile provides one).

Usage:
    python3 scripts/make_corpus.py out_dir [--per-profile 10] [--seed 0]
"""

import argparse
from pathlib import Path

from edpsolve.decomposition import serialize_decomposition
from edpsolve.generators import gen_random_instance
from edpsolve.graphs import serialize_instance

PROFILES = {
    "tree-plus": dict(n=9, extra_edges=3, num_pairs=4),
    "simple": dict(n=9, extra_edges=0, num_pairs=5),
    "bounded-tcw": dict(n=10, extra_edges=4, num_pairs=4),
}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir")
    parser.add_argument("--per-profile", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for profile, params in PROFILES.items():
        for i in range(args.per_profile):
            seed = args.seed + i
            inst, dec = gen_random_instance(seed, params["n"], params["extra_edges"], params["num_pairs"], profile=profile)
            stem = f"{profile}-{seed:03d}"
            (out / f"{stem}.edp").write_text(serialize_instance(inst))
            if dec is not None:
                (out / f"{stem}.edp.dec").write_text(serialize_decomposition(dec))
    print(f"wrote {args.per_profile * len(PROFILES)} instances to {out}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Generate two-Gaussian synthetic embedding fixtures (EMB1 + manifests).

Writes train.emb1 / test.emb1 and their manifest sidecars into --out.
"""

import argparse
from pathlib import Path

from spoofcal.store import manifest_path_for, write_embeddings
from spoofcal.synthetic import gaussian_pair


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--n-train", type=int, default=2000)
    parser.add_argument("--n-test", type=int, default=2000)
    parser.add_argument("--dim", type=int, default=16)
    parser.add_argument("--separation", type=float, default=4.0,
                        help="per-coordinate mean gap in pooled standard deviations")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    train, test = gaussian_pair(
        n_train=args.n_train,
        n_test=args.n_test,
        dim=args.dim,
        separation=args.separation,
        seed=args.seed,
    )
    for name, ds in (("train", train), ("test", test)):
        target = out / f"{name}.emb1"
        write_embeddings(ds, target)
        print(f"{target} ({len(ds)} x {ds.dim}, {ds.n_spoof} spoof) "
              f"manifest {manifest_path_for(target)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

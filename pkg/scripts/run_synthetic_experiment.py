#!/usr/bin/env python3
"""End-to-end synthetic experiment: generate, train, evaluate, study.

Drives the CLI exactly as a user would, so the artifacts under --workdir
(model.json, *.metrics.json, *.scores.csv, *.rejection.csv, study.csv) match
what real-data runs produce.  Rerunning with the same arguments rewrites
byte-identical files.
"""

import argparse
import sys
from pathlib import Path

from spoofcal.cli import main as cli_main
from spoofcal.store import manifest_path_for, write_embeddings
from spoofcal.synthetic import gaussian_pair


def run(argv: list[str]) -> None:
    print("+ spoofcal " + " ".join(argv))
    code = cli_main(argv)
    if code != 0:
        sys.exit(code)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", required=True)
    parser.add_argument("--n-train", type=int, default=2000)
    parser.add_argument("--n-test", type=int, default=2000)
    parser.add_argument("--dim", type=int, default=16)
    parser.add_argument("--separation", type=float, default=4.0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--classifier", choices=("logistic", "mlp"), default="logistic")
    args = parser.parse_args()

    work = Path(args.workdir)
    data = work / "data"
    data.mkdir(parents=True, exist_ok=True)
    train, test = gaussian_pair(
        n_train=args.n_train,
        n_test=args.n_test,
        dim=args.dim,
        separation=args.separation,
        seed=args.seed,
    )
    write_embeddings(train, data / "train.emb1")
    write_embeddings(test, data / "test.emb1")
    train_manifest = str(manifest_path_for(data / "train.emb1"))
    test_manifest = str(manifest_path_for(data / "test.emb1"))

    run(
        [
            "train",
            "--train-manifest", train_manifest,
            "--classifier", args.classifier,
            "--output-dir", str(work / "run"),
        ]
    )
    run(
        [
            "eval",
            "--model", str(work / "run" / "model.json"),
            "--eval-manifest", test_manifest,
            "--output-dir", str(work / "run"),
        ]
    )
    study_sizes = [s for s in (250, 500, 1000, 2000) if s <= args.n_train]
    study_args = [
        "study",
        "--train-manifest", train_manifest,
        "--eval-manifest", test_manifest,
        "--classifier", args.classifier,
        "--output-dir", str(work / "study"),
    ]
    for size in study_sizes:
        study_args += ["--subsample-size", str(size)]
    run(study_args)
    print(f"artifacts under {work}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

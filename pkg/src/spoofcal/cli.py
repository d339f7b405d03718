"""Command-line front end: train, eval, ensemble, study, extract-check.

Configuration comes from flags, from a single JSON config file, or both
(flags win).  Environment variables are never consulted.  Machine-readable
outputs carry raw fractions; percentages appear only in the human summaries
printed to stdout.  All files are written atomically and contain no
timestamps, so reruns with identical inputs are byte-identical.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .classifier import (
    TrainConfig,
    ensemble_predict,
    load_model,
    predict_proba,
    save_model,
    train_logistic,
    train_mlp,
)
from .errors import DataError, NumericError
from .metrics import ece, eer, write_bins_csv, write_metrics_report
from .selective import evaluate_all, make_predictions, write_rejection_csv, write_scores_csv
from .store import atomic_write_text, load_dataset, load_manifest, read_matrix, subsample

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

CLASSIFIERS = ("logistic", "mlp")


class UsageError(Exception):
    """Bad invocation: missing inputs, malformed config, unknown options."""


@dataclass
class ExperimentConfig:
    train_manifest: str | None = None
    eval_manifests: list[str] = field(default_factory=list)
    classifier: str = "logistic"
    lam: float = 1e-4
    tol: float = 1e-7
    max_iters: int = 10000
    standardize: bool = True
    seed: int = 0
    hidden_size: int = 256
    step_size: float = 0.1
    batch_size: int = 64
    epochs: int = 50
    subsample_sizes: list[int] = field(default_factory=list)
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2])
    output_dir: str | None = None
    decision_threshold: float = 0.5

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            lam=self.lam,
            tol=self.tol,
            max_iters=self.max_iters,
            standardize=self.standardize,
            seed=self.seed,
            hidden_size=self.hidden_size,
            step_size=self.step_size,
            batch_size=self.batch_size,
            epochs=self.epochs,
        )


# JSON config key -> (attribute, coercion)
_CONFIG_KEYS = {
    "train_manifest": ("train_manifest", str),
    "eval_manifests": ("eval_manifests", lambda v: [str(x) for x in v]),
    "classifier": ("classifier", str),
    "lambda": ("lam", float),
    "tol": ("tol", float),
    "max_iters": ("max_iters", int),
    "standardize": ("standardize", bool),
    "seed": ("seed", int),
    "hidden_size": ("hidden_size", int),
    "step_size": ("step_size", float),
    "batch_size": ("batch_size", int),
    "epochs": ("epochs", int),
    "subsample_sizes": ("subsample_sizes", lambda v: [int(x) for x in v]),
    "seeds": ("seeds", lambda v: [int(x) for x in v]),
    "output_dir": ("output_dir", str),
    "decision_threshold": ("decision_threshold", float),
}


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig()
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            payload = json.loads(Path(config_path).read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {config_path}: {exc}") from None
        if not isinstance(payload, dict):
            raise UsageError(f"config {config_path} must hold a JSON object")
        for key, value in payload.items():
            if key not in _CONFIG_KEYS:
                raise UsageError(f"unknown config key {key!r}")
            attr, coerce = _CONFIG_KEYS[key]
            try:
                setattr(cfg, attr, coerce(value))
            except (TypeError, ValueError) as exc:
                raise UsageError(f"bad config value for {key!r}: {exc}") from None
    for _, (attr, _) in _CONFIG_KEYS.items():
        flag_value = getattr(args, attr, None)
        if flag_value is not None:
            setattr(cfg, attr, flag_value)
    if cfg.classifier not in CLASSIFIERS:
        raise UsageError(f"classifier must be one of {CLASSIFIERS}, got {cfg.classifier!r}")
    if not cfg.seeds:
        raise UsageError("seeds must not be empty")
    return cfg


def _require_output_dir(cfg: ExperimentConfig) -> Path:
    if not cfg.output_dir:
        raise UsageError("an output directory is required (--output-dir)")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _train_model(dataset, cfg: ExperimentConfig, train_config: TrainConfig):
    if cfg.classifier == "logistic":
        return train_logistic(dataset, train_config)
    return train_mlp(dataset, train_config)


def _dataset_base(manifest_path: str, used: dict[str, int]) -> str:
    name = Path(manifest_path).name
    for suffix in (".manifest.json", ".json"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
            break
    else:
        name = Path(name).stem
    used[name] = used.get(name, 0) + 1
    return name if used[name] == 1 else f"{name}-{used[name]}"


def cmd_train(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    if not cfg.train_manifest:
        raise UsageError("train requires a training manifest (--train-manifest)")
    out = _require_output_dir(cfg)
    dataset = load_dataset(cfg.train_manifest)
    model = _train_model(dataset, cfg, cfg.train_config())
    save_model(model, out / "model.json")
    report = {
        "converged": model.meta.converged,
        "final_loss": model.meta.final_loss,
        "iterations": model.meta.iterations,
    }
    atomic_write_text(out / "train_report.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(
        f"trained {cfg.classifier} on {len(dataset)} samples "
        f"(dim {dataset.dim}): converged={model.meta.converged} "
        f"iterations={model.meta.iterations} final_loss={model.meta.final_loss:.6g}"
    )
    print(f"wrote {out / 'model.json'}")
    return EXIT_OK


def _evaluate_manifests(models, cfg: ExperimentConfig, out: Path) -> None:
    used: dict[str, int] = {}
    for manifest in cfg.eval_manifests:
        base = _dataset_base(manifest, used)
        dataset = load_dataset(manifest)
        if len(models) == 1:
            probs = predict_proba(models[0], dataset)
        else:
            probs = ensemble_predict(models, dataset)
        predictions = make_predictions(dataset.ids, probs, cfg.decision_threshold)
        report, curve = evaluate_all(
            predictions, dataset.labels, decision_threshold=cfg.decision_threshold
        )
        write_metrics_report(report, out / f"{base}.metrics.json")
        write_scores_csv(predictions, dataset.labels, out / f"{base}.scores.csv")
        write_rejection_csv(curve, out / f"{base}.rejection.csv")
        write_bins_csv(report.bins, out / f"{base}.bins.csv")
        print(
            f"{base}: EER {report.eer * 100:.2f}% ECE {report.ece * 100:.2f}% "
            f"accuracy {report.accuracy * 100:.2f}% (n={report.n})"
        )


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    if not args.model:
        raise UsageError("eval requires a model file (--model)")
    if not cfg.eval_manifests:
        raise UsageError("eval requires at least one --eval-manifest")
    out = _require_output_dir(cfg)
    _evaluate_manifests([load_model(args.model)], cfg, out)
    return EXIT_OK


def cmd_ensemble(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    if not args.models:
        raise UsageError("ensemble requires at least one --model")
    if not cfg.eval_manifests:
        raise UsageError("ensemble requires at least one --eval-manifest")
    out = _require_output_dir(cfg)
    _evaluate_manifests([load_model(p) for p in args.models], cfg, out)
    return EXIT_OK


def cmd_study(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    if not cfg.train_manifest:
        raise UsageError("study requires a training manifest (--train-manifest)")
    if not cfg.eval_manifests:
        raise UsageError("study requires at least one --eval-manifest")
    if not cfg.subsample_sizes:
        raise UsageError("study requires subsample sizes (--subsample-size)")
    out = _require_output_dir(cfg)
    train_set = load_dataset(cfg.train_manifest)
    used: dict[str, int] = {}
    eval_sets = [(_dataset_base(m, used), load_dataset(m)) for m in cfg.eval_manifests]
    base_config = cfg.train_config()
    replicates: list[dict] = []
    for size in cfg.subsample_sizes:
        for seed in cfg.seeds:
            subset = subsample(train_set, size, seed)
            model = _train_model(subset, cfg, replace(base_config, seed=seed))
            for base, dataset in eval_sets:
                probs = predict_proba(model, dataset)
                eer_value, _ = eer(probs, dataset.labels)
                ece_value, _ = ece(probs, dataset.labels)
                replicates.append(
                    {
                        "size": size,
                        "seed": seed,
                        "dataset": base,
                        "eer": eer_value,
                        "ece": ece_value,
                    }
                )
    rows = []
    for rep in replicates:
        rows.append(
            [
                "replicate",
                rep["size"],
                rep["seed"],
                rep["dataset"],
                repr(rep["eer"]),
                repr(rep["ece"]),
                "",
                "",
            ]
        )
    for size in cfg.subsample_sizes:
        for base, _ in eval_sets:
            eers = [r["eer"] for r in replicates if r["size"] == size and r["dataset"] == base]
            eces = [r["ece"] for r in replicates if r["size"] == size and r["dataset"] == base]
            eer_std = float(np.std(eers, ddof=1)) if len(eers) > 1 else None
            ece_std = float(np.std(eces, ddof=1)) if len(eces) > 1 else None
            mean_eer = float(np.mean(eers))
            mean_ece = float(np.mean(eces))
            rows.append(
                [
                    "aggregate",
                    size,
                    "",
                    base,
                    repr(mean_eer),
                    repr(mean_ece),
                    "" if eer_std is None else repr(eer_std),
                    "" if ece_std is None else repr(ece_std),
                ]
            )
            spread = f" +/- {eer_std * 100:.2f}%" if eer_std is not None else ""
            print(f"size {size} on {base}: mean EER {mean_eer * 100:.2f}%{spread}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kind", "size", "seed", "dataset", "eer", "ece", "eer_std", "ece_std"])
    writer.writerows(rows)
    atomic_write_text(out / "study.csv", buf.getvalue())
    print(f"wrote {out / 'study.csv'}")
    return EXIT_OK


def read_study_csv(path: str | Path) -> list[dict]:
    """Parse a study.csv back into typed rows."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append(
                {
                    "kind": row["kind"],
                    "size": int(row["size"]),
                    "seed": int(row["seed"]) if row["seed"] else None,
                    "dataset": row["dataset"],
                    "eer": float(row["eer"]),
                    "ece": float(row["ece"]),
                    "eer_std": float(row["eer_std"]) if row["eer_std"] else None,
                    "ece_std": float(row["ece_std"]) if row["ece_std"] else None,
                }
            )
    return rows


def cmd_extract_check(args: argparse.Namespace) -> int:
    matrix = read_matrix(args.embedding_file)
    summary = {
        "path": str(args.embedding_file),
        "n": int(matrix.shape[0]),
        "d": int(matrix.shape[1]),
        "dtype": "float32",
        "finite": True,
    }
    if args.manifest:
        dataset = load_dataset(args.manifest)
        target = Path(args.embedding_file).resolve()
        manifest = load_manifest(args.manifest)
        base = Path(args.manifest).parent
        referenced = {(base / e.embedding_file).resolve() for e in manifest.entries}
        if target not in referenced:
            raise DataError(f"{args.manifest} never references {args.embedding_file}")
        summary["manifest_entries"] = len(dataset)
        summary["manifest_ok"] = True
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; explicit flags override it")
    parser.add_argument("--train-manifest", dest="train_manifest", help="training manifest JSON")
    parser.add_argument(
        "--eval-manifest",
        dest="eval_manifests",
        action="append",
        help="evaluation manifest JSON (repeatable)",
    )
    parser.add_argument("--classifier", choices=CLASSIFIERS, default=None)
    parser.add_argument("--lambda", dest="lam", type=float, default=None, help="L2 coefficient")
    parser.add_argument("--tol", type=float, default=None, help="gradient stopping tolerance")
    parser.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    parser.add_argument(
        "--standardize",
        dest="standardize",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="per-feature standardization (default on)",
    )
    parser.add_argument("--seed", type=int, default=None, help="training seed")
    parser.add_argument(
        "--hidden-size",
        dest="hidden_size",
        type=int,
        default=None,
        help="MLP hidden width (implementation default 256, not a tuned value)",
    )
    parser.add_argument(
        "--step-size",
        dest="step_size",
        type=float,
        default=None,
        help="MLP SGD step size (implementation default 0.1, not a tuned value)",
    )
    parser.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    parser.add_argument("--epochs", type=int, default=None)
    parser.add_argument(
        "--subsample-size",
        dest="subsample_sizes",
        action="append",
        type=int,
        help="study subset size (repeatable)",
    )
    parser.add_argument(
        "--study-seed",
        dest="seeds",
        action="append",
        type=int,
        help="study replicate seed (repeatable; default 0 1 2)",
    )
    parser.add_argument("--output-dir", dest="output_dir")
    parser.add_argument(
        "--decision-threshold", dest="decision_threshold", type=float, default=None
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spoofcal",
        description="Train and evaluate calibrated spoof/bonafide classifiers "
        "on utterance-level embeddings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit a classifier and write model + report")
    _add_config_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="score eval sets with one model")
    p_eval.add_argument("--model", required=False, help="model JSON file")
    _add_config_flags(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_ens = sub.add_parser("ensemble", help="score eval sets with averaged member probabilities")
    p_ens.add_argument(
        "--model", dest="models", action="append", required=False, help="member model (repeatable)"
    )
    _add_config_flags(p_ens)
    p_ens.set_defaults(func=cmd_ensemble)

    p_study = sub.add_parser("study", help="subsample-size sweep with seed replicates")
    _add_config_flags(p_study)
    p_study.set_defaults(func=cmd_study)

    p_check = sub.add_parser("extract-check", help="validate an EMB1 embedding file")
    p_check.add_argument("embedding_file", help="EMB1 file to validate")
    p_check.add_argument("--manifest", help="also validate this manifest against the file")
    p_check.set_defaults(func=cmd_extract_check)

    return parser


def _emit_error(exc: BaseException) -> None:
    print(
        json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True),
        file=sys.stderr,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        _emit_error(exc)
        return EXIT_USAGE
    except NumericError as exc:
        _emit_error(exc)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        _emit_error(exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

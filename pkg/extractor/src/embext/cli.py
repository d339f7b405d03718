"""Command line: labels CSV in, EMB1 + manifest out.

Exit codes: 0 every listed file extracted; 1 output written but some files
were skipped (each logged to stderr); 2 usage error; 3 nothing could be
extracted or the model failed to load.
"""

import argparse
import json
import sys

from .errors import DataError
from .extract import DEFAULT_MODEL, ExtractorConfig, run_extraction

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2
EXIT_DATA = 3


def parse_layer(text: str):
    if text == "last_hidden":
        return text
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"layer must be 'last_hidden' or a non-negative index, got {text!r}"
        ) from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"layer index must be non-negative, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embext",
        description="Extract utterance-level embeddings from audio listed in a path,label CSV.",
    )
    parser.add_argument("labels_csv", help="CSV with header 'path,label'; labels bonafide/spoof")
    parser.add_argument("--out", required=True, help="output EMB1 path (manifest written beside it)")
    parser.add_argument("--model-id", default=DEFAULT_MODEL, help="model-hub name or local checkpoint dir")
    parser.add_argument(
        "--layer",
        type=parse_layer,
        default="last_hidden",
        help="'last_hidden' or hidden-state index (0 = before the first transformer block)",
    )
    parser.add_argument("--batch-size", type=int, default=1, help="files per forward pass")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE

    try:
        import transformers

        transformers.utils.logging.set_verbosity_error()
        transformers.utils.logging.disable_progress_bar()
        config = ExtractorConfig(
            model_id=args.model_id, layer=args.layer, batch_size=args.batch_size
        )
        result = run_extraction(args.labels_csv, args.out, config)
    except (DataError, OSError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_DATA

    for sample_id, reason in result.skipped:
        print(f"skipped {sample_id}: {reason}", file=sys.stderr)
    summary = {
        "output": str(args.out),
        "written": len(result.ids),
        "skipped": len(result.skipped),
        "dim": int(result.matrix.shape[1]),
    }
    print(json.dumps(summary, sort_keys=True))
    return EXIT_PARTIAL if result.skipped else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

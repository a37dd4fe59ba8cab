"""Command line for the conversion layer."""

from __future__ import annotations

import argparse
import json
import sys

from .fixtures import make_fixtures
from .models import export_model
from .sts_data import export_sts, pretokenize_sts


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ditto-export",
        description="Convert checkpoints and datasets into the engine's portable formats",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export-model", help="dump a checkpoint into a model directory")
    p.add_argument("--source", required=True, help="hub id or local checkpoint directory")
    p.add_argument("--output", required=True)
    p.add_argument("--revision", default=None)
    p.set_defaults(func=lambda a: print(export_model(a.source, a.output, revision=a.revision)))

    p = sub.add_parser("export-sts", help="normalize raw STS releases into canonical TSVs")
    p.add_argument("--source", required=True, help="root holding STS12..STS16/STSB/SICKR raw dirs")
    p.add_argument("--output", required=True)
    p.set_defaults(func=lambda a: print(json.dumps(export_sts(a.source, a.output), indent=2, sort_keys=True)))

    p = sub.add_parser("pretokenize", help="emit .ids.tsv mirrors with a checkpoint's tokenizer")
    p.add_argument("--tokenizer", required=True)
    p.add_argument("--data", required=True, help="canonical TSV root")
    p.add_argument("--output", required=True)
    p.add_argument("--tasks", nargs="*", default=None)
    p.set_defaults(func=lambda a: print(
        f"wrote {pretokenize_sts(a.tokenizer, a.data, a.output, tasks=a.tasks)} files"
    ))

    p = sub.add_parser("make-fixtures", help="generate the committed test fixtures")
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=lambda a: print(make_fixtures(a.output, seed=a.seed)))

    args = parser.parse_args(argv)
    try:
        args.func(args)
    except Exception as exc:
        print(f"ditto-export: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

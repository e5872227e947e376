"""Entry point: load a manifest and serve its model over stdio."""

from __future__ import annotations

import argparse
import sys

from oracle_adapter.errors import AdapterError
from oracle_adapter.manifest import load_manifest
from oracle_adapter.models import load_model
from oracle_adapter.serve import serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oracle-adapter",
        description="Serve a classifier over the auditor's JSON-lines "
                    "prediction protocol (requests on stdin, answers on stdout).")
    parser.add_argument("--manifest", required=True, help="adapter manifest JSON")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        manifest = load_manifest(args.manifest)
        predictor = load_model(manifest.model)
        return serve(manifest, predictor)
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

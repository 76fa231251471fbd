"""auddt-scorer: serve a wrapped detector over protocol v1 on stdio."""

from __future__ import annotations

import argparse
import json
import sys

from .binding import ModelBinding
from .server import serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="auddt-scorer",
        description="Wrap a detector class and answer scoring requests on stdio.",
    )
    parser.add_argument("--wrapper", required=True,
                        help="path to the wrapper .py file, or 'builtin'")
    parser.add_argument("--class", dest="class_name", required=True,
                        help="detector class name inside the wrapper")
    parser.add_argument("--checkpoint", default=None, help="checkpoint path (opaque)")
    parser.add_argument("--device", default="cpu", help="device string (opaque)")
    parser.add_argument("--model-args", default=None,
                        help="JSON object of extra constructor keyword arguments")
    parser.add_argument("--squash", choices=["none", "sigmoid"], default="none",
                        help="map raw model outputs into (0, 1) before replying")
    return parser


def main(argv=None) -> None:
    args = build_parser().parse_args(argv)
    model_args = {}
    if args.model_args:
        try:
            model_args = json.loads(args.model_args)
        except json.JSONDecodeError as exc:
            print(f"--model-args is not valid JSON: {exc}", file=sys.stderr)
            sys.exit(2)
        if not isinstance(model_args, dict):
            print("--model-args must be a JSON object", file=sys.stderr)
            sys.exit(2)
    binding = ModelBinding(
        wrapper_path=args.wrapper,
        class_name=args.class_name,
        checkpoint=args.checkpoint,
        device=args.device,
        model_args=model_args,
        squash=args.squash,
    )
    sys.exit(serve(binding))

"""Command-line interface: one subcommand per pipeline stage plus a server.

Configuration comes from an optional TOML/JSON file (``--config``), then
repeatable ``--set key=value`` overrides, then the convenience flags —
later sources win.  Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import pipeline
from .config import PipelineConfig, apply_overrides, load_config
from .errors import RingSketchError

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    """argparse's default bad-usage exit code is 2; this CLI reserves 2
    for data errors, so usage problems exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", metavar="FILE",
                     help="TOML or JSON pipeline configuration file")
    sub.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE",
                     help="override one config value (dotted keys reach "
                          "sketch/augment/train, e.g. train.epochs=5)")
    sub.add_argument("--mesh-dir", help="directory of input .obj files")
    sub.add_argument("--output-dir", help="artifact directory")
    sub.add_argument("--master-seed", type=int, help="seed for all randomness")
    sub.add_argument("--scorer", help="min_l2 | top6 | embed | fused")
    sub.add_argument("--descriptor", help="grid | hog")


def build_parser() -> _Parser:
    parser = _Parser(prog="ringsketch",
                     description="Sketch-based 3D shape retrieval pipeline")
    subs = parser.add_subparsers(dest="command", metavar="COMMAND")

    stages = [
        ("ingest", "normalize input meshes into the artifact tree"),
        ("render", "render ring-camera views of every ingested mesh"),
        ("sketchify", "generate augmented sketch queries and ground truth"),
        ("index", "build descriptor gallery index(es)"),
        ("train", "train the contrastive embedding ensemble"),
        ("retrieve", "rank every query and write the rankings CSV"),
        ("evaluate", "score rankings against ground truth"),
    ]
    for name, help_text in stages:
        _add_common(subs.add_parser(name, help=help_text))

    serve = subs.add_parser("serve", help="run the HTTP query service")
    _add_common(serve)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)

    synth = subs.add_parser(
        "synth", help="write a procedural demo corpus of .obj meshes")
    synth.add_argument("--count", type=int, default=20)
    synth.add_argument("--master-seed", type=int, default=0)
    synth.add_argument("--mesh-dir", required=True,
                       help="directory to write the .obj files into")
    return parser


def _resolve_config(args) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    overrides = list(args.overrides)
    flag_map = {
        "mesh_dir": getattr(args, "mesh_dir", None),
        "output_dir": getattr(args, "output_dir", None),
        "master_seed": getattr(args, "master_seed", None),
        "scorer": getattr(args, "scorer", None),
        "descriptor": getattr(args, "descriptor", None),
    }
    overrides += [f"{k}={v}" for k, v in flag_map.items() if v is not None]
    if overrides:
        config = apply_overrides(config, overrides)
    return config


def _cmd_synth(args) -> dict:
    from .mesh_io import save_obj
    from .synth import synthetic_corpus

    out = Path(args.mesh_dir)
    out.mkdir(parents=True, exist_ok=True)
    meshes = synthetic_corpus(count=args.count, master_seed=args.master_seed)
    for mesh in meshes:
        save_obj(mesh, out / f"{mesh.id}.obj")
    return {"meshes": len(meshes), "mesh_dir": str(out)}


_STAGES = {
    "ingest": pipeline.cmd_ingest,
    "render": pipeline.cmd_render,
    "sketchify": pipeline.cmd_sketchify,
    "index": pipeline.cmd_build_index,
    "train": pipeline.cmd_train,
    "retrieve": pipeline.cmd_retrieve,
    "evaluate": pipeline.cmd_evaluate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return USAGE_EXIT
    try:
        if args.command == "synth":
            summary = _cmd_synth(args)
        elif args.command == "serve":
            config = _resolve_config(args)
            import uvicorn

            from .service import create_app

            uvicorn.run(create_app(config), host=args.host, port=args.port)
            return 0
        else:
            config = _resolve_config(args)
            summary = _STAGES[args.command](config)
    except (RingSketchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())

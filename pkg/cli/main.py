from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
import yaml
from pydantic import ValidationError

from backend.config import knowledge_dir
from backend.models import MAX_ORDER, MAX_TABLE_M, CurveSpec, JobConfig
from backend.services.engine import (
    CurvatureEngine,
    build_tables,
    eval_frame,
    render_csv,
    render_json,
    tables_frames,
    update_frame,
    verify_frame,
)
from backend.services.preset_store import PresetStore, load_spec
from common.errors import CurvatureError

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_DOMAIN = 2


def parse_xi_range(text: str) -> List[float]:
    """``a:b:count`` -> ``count`` evenly spaced points from a to b inclusive."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected a:b:count, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a:b:count, got {text!r}") from exc
    if count < 1:
        raise argparse.ArgumentTypeError("count must be at least 1")
    return np.linspace(start, stop, count).tolist()


def parse_points(text: str) -> List[float]:
    try:
        return [float(value) for value in text.split(",") if value.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected x1,x2,..., got {text!r}") from exc


def _add_output_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", dest="output_format", choices=["csv", "json"], default="csv")
    parser.add_argument("--out", help="output path (default: stdout)")


def _add_sampling_args(parser: argparse.ArgumentParser, default_order: int) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--spec", type=Path, help="curve spec file (.json, .yaml)")
    source.add_argument("--preset", help="name of a preset under knowledge/presets")
    points = parser.add_mutually_exclusive_group(required=True)
    points.add_argument("--xi", type=parse_xi_range, help="a:b:count")
    points.add_argument("--points", type=parse_points, help="x1,x2,...")
    parser.add_argument("--order", type=int, default=default_order, help=f"derivative order N <= {MAX_ORDER}")
    _add_output_args(parser)


def _add_increment_args(parser: argparse.ArgumentParser, required: bool) -> None:
    increment = parser.add_mutually_exclusive_group(required=required)
    increment.add_argument("--increment", type=Path, help="incremental rotation field spec file")
    increment.add_argument("--increment-preset", help="preset name of the incremental field")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curvjet", description="Curvature derivatives of framed curves on SO(3)."
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging on stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    eval_parser = commands.add_parser("eval", help="rotation, curvature, material and co-rotational jets")
    _add_sampling_args(eval_parser, default_order=2)

    update_parser = commands.add_parser("update", help="Eulerian update by an incremental rotation field")
    _add_sampling_args(update_parser, default_order=2)
    _add_increment_args(update_parser, required=True)
    update_parser.add_argument("--verify", action="store_true", help="append oracle error columns")

    tables_parser = commands.add_parser("tables", help="jmax and reduced bracket coefficients")
    tables_parser.add_argument("max_m", type=int, nargs="?", default=6, help=f"largest m (<= {MAX_TABLE_M})")
    tables_parser.add_argument("--format", dest="output_format", choices=["text", "json"], default="text")

    verify_parser = commands.add_parser("verify", help="compare closed forms against finite differences")
    _add_sampling_args(verify_parser, default_order=4)
    _add_increment_args(verify_parser, required=False)

    commands.add_parser("presets", help="list preset curve specs")
    return parser


def _spec_from(path: Optional[Path], preset: Optional[str], store: PresetStore) -> Optional[CurveSpec]:
    if path is not None:
        return load_spec(path)
    if preset is not None:
        return store.get(preset)
    return None


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_eval(job: JobConfig, engine: CurvatureEngine) -> int:
    output = engine.evaluate(job.spec, job.points, job.order)
    if job.output_format == "json":
        _emit(render_json(output), job.out)
    else:
        _emit(render_csv(eval_frame(output), engine.settings.significant_digits), job.out)
    return EXIT_OK


def cmd_update(job: JobConfig, engine: CurvatureEngine) -> int:
    output = engine.update(job.spec, job.increment, job.points, job.order, verify=job.verify)
    if job.output_format == "json":
        _emit(render_json(output), job.out)
    else:
        _emit(render_csv(update_frame(output), engine.settings.significant_digits), job.out)
    if job.verify:
        failing = [
            sample.xi
            for sample in output.samples
            if not sample.errors.Q <= engine.settings.tolerance(0)
            or not all(
                err is not None and err <= engine.settings.tolerance(n)
                for n, err in enumerate(sample.errors.kappa)
            )
        ]
        if failing:
            logger.warning("update oracle missed tolerance or had no stencil at xi = %s", failing)
            return EXIT_DOMAIN
    return EXIT_OK


def cmd_tables(job: JobConfig, engine: CurvatureEngine) -> int:
    tables = build_tables(job.max_m)
    if job.output_format == "json":
        _emit(render_json(tables), None)
        return EXIT_OK
    listing, triangle = tables_frames(tables)
    text = (
        "jmax(m) and b(m, j)\n"
        + listing.to_string(index=False)
        + "\n\njmax(n - i)\n"
        + triangle.to_string()
        + "\n"
    )
    _emit(text, None)
    return EXIT_OK


def cmd_verify(job: JobConfig, engine: CurvatureEngine) -> int:
    output = engine.verify(job.spec, job.points, job.order, increment=job.increment)
    if job.output_format == "json":
        _emit(render_json(output), job.out)
    else:
        _emit(render_csv(verify_frame(output), engine.settings.significant_digits), job.out)
    return EXIT_OK if output.passed else EXIT_DOMAIN


def cmd_presets(job: JobConfig, engine: CurvatureEngine) -> int:
    for preset in engine.store.list_presets():
        sys.stdout.write(f"{preset['name']}\t{preset['kind']}\t{preset['description'] or ''}\n")
    return EXIT_OK


COMMAND_HANDLERS: Dict[str, Callable[[JobConfig, CurvatureEngine], int]] = {
    "eval": cmd_eval,
    "update": cmd_update,
    "tables": cmd_tables,
    "verify": cmd_verify,
    "presets": cmd_presets,
}


def build_job(args: argparse.Namespace, store: PresetStore) -> JobConfig:
    command = args.command
    if command in ("tables", "presets"):
        return JobConfig(
            command=command,
            max_m=getattr(args, "max_m", 6),
            output_format="json" if getattr(args, "output_format", "text") == "json" else "csv",
        )
    return JobConfig(
        command=command,
        spec=_spec_from(args.spec, args.preset, store),
        increment=_spec_from(
            getattr(args, "increment", None), getattr(args, "increment_preset", None), store
        ),
        points=args.xi if args.xi is not None else args.points,
        order=args.order,
        output_format=args.output_format,
        out=args.out,
        verify=getattr(args, "verify", False),
    )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    root = knowledge_dir()
    try:
        store = PresetStore(root / "presets")
        engine = CurvatureEngine(root / "settings.yaml", store)
        job = build_job(args, store)
        return COMMAND_HANDLERS[job.command](job, engine)
    except CurvatureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (OSError, ValidationError, json.JSONDecodeError, yaml.YAMLError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

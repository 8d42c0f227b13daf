# hybridq/cli.py
"""
Command line:

    simulate <semiclassical|quantum|wigner|sweep> (--config FILE | --preset NAME)
             [--out DIR] [--workers N] [--seed N]
    simulate presets [--schema | --show NAME]

Exit codes: 0 success, 2 config error, 3 numerical error, 4 I/O error.
Failures print one JSON error record on stderr.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from hybridq import __version__
from hybridq.core import config as knobs
from hybridq.core.enums import PresetNameEnum, RunModeEnum
from hybridq.core.errors import ConfigError, HybridQError, IntegrationError, error_record, exit_code_for
from hybridq.models import RunConfig
from hybridq.pipeline import run
from hybridq.services.documents import parse_config, schema, serialize_config
from hybridq.services.presets import PRESETS, preset

log = logging.getLogger(__name__)

__all__ = ["parse_config", "serialize_config", "preset", "run", "main", "build_parser"]


def _configure_logging() -> None:
    logging.basicConfig(
        level=getattr(logging, knobs.LOG_LEVEL, logging.INFO),
        format="%(message)s",
        stream=sys.stdout,
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simulate", description="Driven spin-ensemble/cavity simulations")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for mode in RunModeEnum:
        p = sub.add_parser(mode.value, help=f"{mode.value} run")
        source = p.add_mutually_exclusive_group(required=True)
        source.add_argument("--config", type=Path, help="key=value run document")
        source.add_argument("--preset", choices=[n.value for n in PresetNameEnum], help="built-in parameter set")
        p.add_argument("--out", type=str, default=None, help="output directory (overrides output_dir)")
        p.add_argument("--workers", type=int, default=None, help="sweep worker processes")
        p.add_argument("--seed", type=int, default=None, help="seed of the random discretization")

    p = sub.add_parser("presets", help="list presets or print the config schema")
    p.add_argument("--schema", action="store_true", help="print every accepted key")
    p.add_argument("--show", choices=[n.value for n in PresetNameEnum], help="print a preset as a run document")
    return parser


def _with_overrides(config: RunConfig, overrides: Dict[str, Any]) -> RunConfig:
    updates = {k: v for k, v in overrides.items() if v is not None}
    if not updates:
        return config
    try:
        return RunConfig.model_validate({**config.model_dump(), **updates})
    except ValidationError as e:
        raise _as_toolkit_error(e) from e


def load_run_config(args: argparse.Namespace) -> RunConfig:
    if args.preset:
        config = preset(args.preset)
    else:
        config = parse_config(args.config.read_text(encoding="utf-8"))
    return _with_overrides(config, {
        "mode": RunModeEnum(args.command),
        "output_dir": args.out,
        "workers": args.workers,
        "seed": args.seed,
    })


def _print_presets(args: argparse.Namespace) -> None:
    if args.show:
        sys.stdout.write(serialize_config(preset(args.show)))
        return
    if args.schema:
        rows = schema()
        width = max(len(r["key"]) for r in rows)
        for r in rows:
            print(f"{r['key']:<{width}}  {r['type']:<16} {r['default']:<12} {r['description']}")
        return
    for name, factory in PRESETS.items():
        cfg = factory()
        print(f"{name.value:<10} {cfg.mode.value:<14} delta={cfg.resolved_delta_values()} r={cfg.resolved_r_values()}")


def _as_toolkit_error(exc: Exception) -> HybridQError:
    """Map a third-party failure that escaped a module onto the error hierarchy."""
    if isinstance(exc, ValidationError):
        first = exc.errors()[0]
        key = next((str(p) for p in reversed(first["loc"]) if isinstance(p, str)), None)
        return ConfigError(first["msg"], key=key)
    return IntegrationError(f"numerical failure: {exc}")


def _report(exc: BaseException) -> int:
    log.error("❌ %s", exc)
    print(json.dumps(error_record(exc)), file=sys.stderr)
    return exit_code_for(exc)


def main(argv: Optional[List[str]] = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        if args.command == "presets":
            _print_presets(args)
            return 0
        config = load_run_config(args)
        run(config, workers=args.workers)
        return 0
    except (HybridQError, OSError) as e:
        return _report(e)
    except (ValidationError, ValueError, ArithmeticError) as e:
        return _report(_as_toolkit_error(e))

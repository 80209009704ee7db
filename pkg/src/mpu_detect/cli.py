"""Command line entry point: prior, augment, clean, synth, train, eval.

Artifacts are written atomically (temp file + rename) and every run drops
a manifest (resolved parameters, their hash, seed, versions) next to its
primary output.  Exit codes: 0 success, 1 usage, 2 config, 3 data,
4 runtime.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    SEED_ENV_VAR,
    RunConfig,
    config_hash,
    load_synth_config,
)
from .data import clean_spaces, load_jsonl, synth_benchmark, write_jsonl, Record
from .errors import ConfigError, DataError, MpuError, UsageError
from .model import LinearModel, evaluate, train
from .multiscale import multiscale_once, record_rng
from .prior import PriorConfig, prior_curve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4


class _Parser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting with code 2."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def atomic_write_text(path: str | Path, content: str) -> None:
    """Write via a sibling temp file and rename, so readers never see partials."""
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(content)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def write_manifest(out_path: str | Path, command: str, params: dict, seed=None) -> None:
    manifest = {
        "schema_version": 1,
        "command": command,
        "config_hash": config_hash(params),
        "config": params,
        "seed": seed,
        "versions": {
            "mpu_detect": __version__,
            "python": ".".join(map(str, sys.version_info[:3])),
            "numpy": np.__version__,
        },
    }
    atomic_write_text(
        str(out_path) + ".manifest.json", json.dumps(manifest, indent=2, sort_keys=True)
    )


def _records_jsonl(records: list[Record]) -> str:
    lines = []
    for record in records:
        obj = {"text": record.text, "label": record.label}
        if record.id is not None:
            obj["id"] = record.id
        lines.append(json.dumps(obj, ensure_ascii=False))
    return "\n".join(lines) + "\n"


def _load_corpus(path: str) -> list[Record]:
    records, errors = load_jsonl(path)
    for message in errors:
        print(f"warning: {path}: {message}", file=sys.stderr)
    return records


def _parse_buckets(arg: str) -> list[tuple[int, float]]:
    buckets = []
    for part in arg.split(","):
        try:
            lo_text, hi_text = part.split(":")
            lo = int(lo_text)
            hi = float("inf") if hi_text == "inf" else int(hi_text)
        except ValueError as exc:
            raise UsageError(
                f"bad bucket {part!r}; expected LO:HI with HI an integer or 'inf'"
            ) from exc
        if lo < 0 or hi <= lo:
            raise UsageError(f"bad bucket {part!r}: need 0 <= LO < HI")
        buckets.append((lo, hi))
    return buckets


def cmd_prior(args) -> int:
    config = PriorConfig(p=args.p, l_max=args.lmax)
    rows = prior_curve(config)
    lines = ["l,prior,top_state_mass"]
    lines += [f"{l},{prior!r},{mass!r}" for l, prior, mass in rows]
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    write_manifest(args.out, "prior", {"p": args.p, "lmax": args.lmax})
    return EXIT_OK


def cmd_augment(args) -> int:
    records = _load_corpus(args.infile)
    seed = int(os.environ.get(SEED_ENV_VAR, args.seed))
    augmented = [
        Record(
            text=multiscale_once(r.text, args.psent, record_rng(seed, 0, i)),
            label=r.label,
            id=r.id,
        )
        for i, r in enumerate(records)
    ]
    atomic_write_text(args.out, _records_jsonl(augmented))
    write_manifest(
        args.out, "augment", {"psent": args.psent, "seed": seed}, seed=seed
    )
    return EXIT_OK


def cmd_clean(args) -> int:
    records = _load_corpus(args.infile)
    cleaned = [
        Record(text=clean_spaces(r.text), label=r.label, id=r.id) for r in records
    ]
    atomic_write_text(args.out, _records_jsonl(cleaned))
    write_manifest(args.out, "clean", {"infile": str(args.infile)})
    return EXIT_OK


def cmd_synth(args) -> int:
    config, resolved = load_synth_config(args.config)
    train_set, test_short, test_long = synth_benchmark(
        config, n_test_per_class=resolved["n_test_per_class"]
    )
    atomic_write_text(args.out_train, _records_jsonl(train_set))
    atomic_write_text(args.out_test_short, _records_jsonl(test_short))
    atomic_write_text(args.out_test_long, _records_jsonl(test_long))
    write_manifest(args.out_train, "synth", resolved, seed=resolved["seed"])
    return EXIT_OK


def cmd_train(args) -> int:
    run_config = RunConfig.load(args.config)
    corpus = _load_corpus(args.train)
    dev = _load_corpus(args.dev) if args.dev else None
    model, history = train(corpus, run_config.train_config(), dev=dev)
    model.train_config_hash = config_hash(run_config.raw)
    atomic_write_text(args.out, json.dumps(model.to_dict(), sort_keys=True))
    metrics = {"history": history}
    if dev is not None:
        metrics["dev"] = evaluate(model, dev).to_dict()
    atomic_write_text(
        str(args.out) + ".metrics.json", json.dumps(metrics, indent=2, sort_keys=True)
    )
    write_manifest(args.out, "train", run_config.raw, seed=run_config["seed"])
    return EXIT_OK


def cmd_eval(args) -> int:
    model = LinearModel.load(args.model)
    corpus = _load_corpus(args.test)
    buckets = _parse_buckets(args.buckets) if args.buckets else None
    report = evaluate(model, corpus, buckets)
    atomic_write_text(args.report, json.dumps(report.to_dict(), indent=2, sort_keys=True))
    write_manifest(args.report, "eval", {"buckets": args.buckets or ""})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mpu-detect", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prior", parents=[], help="emit the prior curve as CSV")
    p.add_argument("--p", type=float, required=True, help="token positive probability")
    p.add_argument("--lmax", type=int, required=True, help="largest tabulated length")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_prior)

    p = sub.add_parser("augment", help="apply one sentence-multiscaling pass")
    p.add_argument("--in", dest="infile", required=True, help="input JSONL corpus")
    p.add_argument("--out", required=True, help="output JSONL corpus")
    p.add_argument("--psent", type=float, required=True, help="sentence mask probability")
    p.add_argument("--seed", type=int, required=True, help="augmentation seed")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("clean", help="strip spaces before closing punctuation")
    p.add_argument("--in", dest="infile", required=True, help="input JSONL corpus")
    p.add_argument("--out", required=True, help="output JSONL corpus")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("synth", help="generate the synthetic benchmark corpora")
    p.add_argument("--config", required=True, help="synth config JSON")
    p.add_argument("--out-train", required=True)
    p.add_argument("--out-test-short", required=True)
    p.add_argument("--out-test-long", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train the detector")
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--train", required=True, help="training JSONL corpus")
    p.add_argument("--dev", default=None, help="held-out JSONL corpus (optional)")
    p.add_argument("--out", required=True, help="output model file")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained detector")
    p.add_argument("--model", required=True, help="model file from train")
    p.add_argument("--test", required=True, help="test JSONL corpus")
    p.add_argument(
        "--buckets",
        default=None,
        help="length buckets like 0:32,32:inf for per-bucket metrics",
    )
    p.add_argument("--report", required=True, help="output metrics JSON")
    p.set_defaults(func=cmd_eval)
    return parser


def run(argv: list[str] | None = None) -> int:
    """Parse argv and execute one subcommand, mapping errors to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SystemExit as exc:  # argparse --help / --version
        return int(exc.code or 0)
    except MpuError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports, not crashes
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run())

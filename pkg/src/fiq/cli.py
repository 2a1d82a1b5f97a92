"""Command-line entry point: sample, measure, arith and experiment subcommands.

Every output document embeds the fully resolved configuration and seed, so a
run can be reproduced byte for byte from its own output.  Files are written
atomically (temp file + rename) into --out, FIQ_OUTPUT_DIR, or the current
directory.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from .errors import FiqError
from .estimators import correlation_report, info_report
from .experiments import RUNNERS, ExperimentSpec, preset_spec
from .arithmetic import prefix_values, scale_fiq_truncated, scaled_digit_table
from .models import (
    IndependentBitsModel,
    model_from_json,
    model_to_json,
    sample_matrix,
)
from .rational import format_rational, parse_rational

EXIT_OK = 0
EXIT_CLAIM_FAILED = 1
EXIT_USAGE = 2


def _write_atomic(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: Path, doc: dict) -> None:
    _write_atomic(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, rows: list[dict]) -> None:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    _write_atomic(path, buf.getvalue())


def _outdir(args) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get("FIQ_OUTPUT_DIR", "."))


def _load_model_doc(text: str) -> dict:
    """Accept a path to a JSON file or an inline JSON object."""
    s = text.strip()
    if s.startswith("{"):
        return json.loads(s)
    with open(s) as fh:
        return json.load(fh)


def _seed_arg(value: str) -> int:
    seed = int(value)
    if not 0 <= seed < (1 << 64):
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return seed


def _rational_arg(value: str) -> Fraction:
    return parse_rational(value)


def _add_model_flags(p: argparse.ArgumentParser, need_seed: bool = True) -> None:
    p.add_argument("--model", required=True, help="model JSON file or inline JSON")
    p.add_argument("--seed", type=_seed_arg, required=need_seed,
                   help="64-bit seed (explicit; there is no time-based default)")
    p.add_argument("--stream", type=int, default=None, help="base stream id")
    p.add_argument("--out", default=None, help="output directory")


def cmd_sample(args) -> int:
    model = model_from_json(_load_model_doc(args.model), seed=args.seed, stream=args.stream)
    s = sample_matrix(model, args.depth, args.samples, threads=args.threads)
    rows = [
        {f"bit_{j + 1}": int(b) for j, b in enumerate(row)}
        for row in s.bits
    ]
    out = _outdir(args) / "samples.csv"
    _write_csv(out, rows)
    print(out)
    return EXIT_OK


def cmd_measure(args) -> int:
    model = model_from_json(_load_model_doc(args.model), seed=args.seed, stream=args.stream)
    s = sample_matrix(model, args.depth, args.samples, threads=args.threads)
    info = info_report(s, l_max=args.blocks)
    corr = correlation_report(s)
    doc = {
        "config": {
            "command": "measure",
            "model": model_to_json(model),
            "depth": args.depth,
            "samples": args.samples,
            "seed": args.seed,
            "blocks": args.blocks,
        },
        "info_report": info.to_jsonable(),
        "correlation_report": corr.to_jsonable(),
    }
    outdir = _outdir(args)
    _write_json(outdir / "report.json", doc)
    if args.mi_csv:
        rows = [
            {"row": i, **{f"col_{j}": v for j, v in enumerate(line)}}
            for i, line in enumerate(corr.mi_matrix.tolist())
        ]
        _write_csv(outdir / "mi_matrix.csv", rows)
    print(outdir / "report.json")
    return EXIT_OK


def cmd_arith(args) -> int:
    model = model_from_json(
        _load_model_doc(args.model),
        seed=args.seed if args.seed is not None else 0,
        stream=args.stream,
    )
    if args.mode == "exact":
        if not isinstance(model, IndependentBitsModel):
            raise FiqError("exact mode needs an independent-bit model")
        dist = scale_fiq_truncated(model, args.constant, args.depth)
        entries = [
            {
                "int": dd.integer_part,
                "frac": "".join(str(b) for b in dd.fraction_bits),
                "prob": format_rational(w),
            }
            for dd, w in dist.items()
        ]
    else:
        if args.seed is None:
            raise FiqError("--seed is required in sample mode")
        import numpy as np

        s = sample_matrix(model, args.depth, args.samples, threads=args.threads)
        table = scaled_digit_table(args.constant, args.depth)
        counts = np.bincount(prefix_values(s), minlength=1 << args.depth)
        agg: dict = {}
        for v, c in enumerate(counts):
            if c:
                agg[table[v]] = agg.get(table[v], 0) + int(c)
        entries = [
            {
                "int": dd.integer_part,
                "frac": "".join(str(b) for b in dd.fraction_bits),
                "prob": c / args.samples,
            }
            for dd, c in agg.items()
        ]
    entries.sort(key=lambda e: (e["int"] is None, e["int"], e["frac"]))
    doc = {
        "config": {
            "command": "arith",
            "model": model_to_json(model),
            "constant": format_rational(args.constant),
            "depth": args.depth,
            "mode": args.mode,
            "samples": args.samples if args.mode == "sample" else None,
            "seed": args.seed,
        },
        "digits_distribution": entries,
    }
    out = _outdir(args) / "arith.json"
    _write_json(out, doc)
    print(out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    if (args.preset is None) == (args.spec is None):
        raise FiqError("give exactly one of --preset or --spec")
    if args.preset is not None:
        spec = preset_spec(args.kind, args.preset, seed=args.seed, threads=args.threads)
    else:
        with open(args.spec) as fh:
            spec = ExperimentSpec.from_json(json.load(fh), seed=args.seed)
        spec = dataclasses.replace(spec, threads=args.threads)
    verdict = RUNNERS[args.kind](spec)
    outdir = _outdir(args)
    for name, rows in verdict.tables.items():
        _write_csv(outdir / f"{name}.csv", rows)
        verdict.artifacts.append(f"{name}.csv")
    verdict.artifacts.append("verdict.json")
    _write_json(outdir / "verdict.json", verdict.to_jsonable())
    for claim in verdict.claims:
        mark = "PASS" if claim.passed else "FAIL"
        print(f"[{mark}] {claim.statement}")
    print(outdir / "verdict.json")
    return EXIT_OK if verdict.passed else EXIT_CLAIM_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fiq",
        description="Finite information quantities: sampling, measurement, "
                    "digit arithmetic and reproducible experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw realizations and dump them as CSV")
    _add_model_flags(p)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("measure", help="information and correlation reports")
    _add_model_flags(p)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--blocks", type=int, default=8, help="maximum block length")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--mi-csv", action="store_true", help="also write the MI matrix as CSV")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("arith", help="determined digits of a scaled quantity")
    _add_model_flags(p, need_seed=False)
    p.add_argument("--constant", type=_rational_arg, required=True, help='rational "p/q"')
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--mode", choices=("exact", "sample"), default="exact")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_arith)

    p = sub.add_parser("experiment", help="run a canned experiment and emit a verdict")
    p.add_argument("kind", choices=("units", "majority", "units-majority"))
    p.add_argument("--preset", default=None)
    p.add_argument("--spec", default=None, help="experiment spec JSON file")
    p.add_argument("--seed", type=_seed_arg, required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FiqError, ValueError, OSError) as exc:
        print(f"fiq: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""``pca-index`` command-line front end.

Exit codes: 0 success, 1 data or domain error, 2 usage error. All output is
UTF-8 CSV with LF endings and six fixed decimals, so repeated runs on the
same inputs are byte-identical.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .core import IndexReport, RunOptions, compute_competitiveness
from .dataset import (
    IndicatorSchema,
    default_schema,
    parse_dataset,
    parse_schema,
    synthesize_dataset,
    validate,
    write_dataset,
)
from .errors import BadBounds, EmptyInput, MalformedLine, PcaIndexError, UnknownEntity
from .ranking import assign_ranks, pillar_leaders

COMMANDS = ("rank", "pillars", "weights", "explain", "validate", "synth")


class DataError(PcaIndexError):
    """IO or domain failure reported with exit code 1."""


def fmt(x: float) -> str:
    s = format(x, ".6f")
    return "0.000000" if s == "-0.000000" else s


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _shape(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"shape must look like NxM, got {text!r}")
    n, m = (_positive_int(p) for p in parts)
    return n, m


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", metavar="PATH", help="dataset CSV")
    common.add_argument("--schema", metavar="PATH", help="schema file (default: shipped 34-indicator schema)")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--mode", choices=("global", "local"), default="global")
    common.add_argument("--divisor", choices=("m", "m-1"), default="m")
    common.add_argument("--constant", choices=("error", "drop", "midpoint"), default="error")
    common.add_argument("--ties", choices=("competition", "ordinal"), default="competition")
    common.add_argument("--bounds", default="sample", metavar="sample|FILE")

    parser = argparse.ArgumentParser(prog="pca-index", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("rank", parents=[common], help="overall ranking")
    p.add_argument("--top", type=_positive_int, metavar="K")
    p.add_argument("--bottom", type=_positive_int, metavar="K")

    p = sub.add_parser("pillars", parents=[common], help="per-pillar leader tables")
    p.add_argument("--k", type=_positive_int, default=10, metavar="K")

    sub.add_parser("weights", parents=[common], help="effective indicator weights")

    p = sub.add_parser("explain", parents=[common], help="per-indicator breakdown of one entity")
    p.add_argument("--entity", required=True, metavar="ID")

    sub.add_parser("validate", parents=[common], help="report exclusions and constant indicators")

    p = sub.add_parser("synth", parents=[common], help="write a synthetic dataset")
    p.add_argument("--shape", type=_shape, default=(34, 641), metavar="NxM")
    p.add_argument("--seed", type=int, default=1, metavar="N")
    return parser


def _read(path: str, what: str) -> str:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"{path}: cannot read {what}: {exc}")
    if not text.strip():
        raise DataError(f"{path}: {what} file is empty")
    return text


def _load_schema(args) -> IndicatorSchema:
    if args.schema is None:
        return default_schema()
    try:
        return parse_schema(_read(args.schema, "schema"))
    except DataError:
        raise
    except PcaIndexError as exc:
        raise DataError(f"{args.schema}: {exc}")


def _load_bounds(path: str) -> dict[str, tuple[float, float]]:
    bounds = {}
    for lineno, raw in enumerate(_read(path, "bounds").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("indicator_code,"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise DataError(f"{path}: {MalformedLine(lineno, 'expected indicator_code,min,max')}")
        try:
            bounds[parts[0]] = (float(parts[1]), float(parts[2]))
        except ValueError:
            raise DataError(f"{path}: line {lineno}: bad number")
    return bounds


def _options(args) -> RunOptions:
    bounds = None if args.bounds == "sample" else _load_bounds(args.bounds)
    try:
        return RunOptions(
            divisor="population" if args.divisor == "m" else "sample",
            constant_policy=args.constant,
            pillar_mode=args.mode,
            bounds=bounds,
            tie_policy=args.ties,
        )
    except BadBounds as exc:
        raise DataError(f"{args.bounds}: {exc}")


def _validated(args, schema, options):
    if args.data is None:
        raise DataError("--data is required for this command")
    try:
        dataset = parse_dataset(_read(args.data, "dataset"), schema)
    except EmptyInput:
        raise DataError(f"{args.data}: dataset file is empty")
    except DataError:
        raise
    except PcaIndexError as exc:
        raise DataError(f"{args.data}: {exc}")
    return validate(dataset, schema, options)


def _report(args) -> IndexReport:
    schema = _load_schema(args)
    options = _options(args)
    check = _validated(args, schema, options)
    for w in check.warnings:
        print(f"warning: {w}", file=sys.stderr)
    for e in check.excluded:
        print(f"warning: excluded entity with missing values: {e}", file=sys.stderr)
    report = compute_competitiveness(check.dataset, schema, options)
    for code in report.dropped:
        print(f"warning: dropped constant indicator {code}", file=sys.stderr)
    for p in report.empty_pillars:
        print(f"warning: pillar {p} has no indicators left", file=sys.stderr)
    return report


def _csv(header: Sequence[str], rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(str(c) for c in row) for row in rows]
    return "\n".join(lines) + "\n"


def cmd_rank(args) -> str:
    report = _report(args)
    table = assign_ranks(report.scores(), args.ties)
    m = len(table)
    if args.top is None and args.bottom is None:
        keep = range(m)
    else:
        top = min(args.top or 0, m)
        bottom = min(args.bottom or 0, m)
        keep = sorted(set(range(top)) | set(range(m - bottom, m)))
    rows = [(table[i].rank, table[i].entity_id, fmt(table[i].score)) for i in keep]
    return _csv(("rank", "entity_id", "index"), rows)


def cmd_pillars(args) -> str:
    report = _report(args)
    scores = {p: report.pillar_scores(p) for p in report.pillar_indices}
    rows = []
    for pillar in report.schema.pillar_order:
        if pillar not in scores:
            continue
        for r in pillar_leaders(scores, pillar, args.k, args.ties):
            rows.append((pillar, r.rank, r.entity_id, fmt(r.score)))
    return _csv(("pillar", "rank", "entity_id", "score"), rows)


def cmd_weights(args) -> str:
    report = _report(args)
    codes = report.normalized.indicator_codes
    rows = [
        (c, report.schema.pillar_of(c), fmt(w)) for c, w in zip(codes, report.effective_weights)
    ]
    total = 0.0
    for w in report.effective_weights:
        total += w
    rows.append(("TOTAL", "", fmt(total)))
    return _csv(("indicator_code", "pillar_code", "effective_weight"), rows)


def cmd_explain(args) -> str:
    report = _report(args)
    try:
        j = report.entity_ids.index(args.entity)
    except ValueError:
        raise UnknownEntity(f"unknown entity {args.entity!r}")
    codes = report.normalized.indicator_codes
    items = []
    for i, (c, w) in enumerate(zip(codes, report.effective_weights)):
        x = report.normalized.values[i][j]
        items.append((i, c, x, w, w * x))
    items.sort(key=lambda t: (-t[4], t[0]))
    rows = [(c, report.schema.pillar_of(c), fmt(x), fmt(w), fmt(v)) for _, c, x, w, v in items]
    for pillar in report.schema.pillar_order:
        if pillar in report.pillar_indices:
            rows.append(("PILLAR", pillar, "", "", fmt(report.pillar_indices[pillar][j])))
    rows.append(("TOTAL", "", "", "", fmt(report.index[j])))
    header = ("indicator_code", "pillar_code", "normalized_value", "effective_weight", "contribution")
    return _csv(header, rows)


def cmd_validate(args) -> tuple[str, int]:
    schema = _load_schema(args)
    check = _validated(args, schema, _options(args))
    return check.render(), (1 if check.fatal else 0)


def cmd_synth(args) -> str:
    schema = _load_schema(args)
    n, m = args.shape
    if n != len(schema):
        raise DataError(f"--shape asks for {n} indicators but the schema has {len(schema)}")
    return write_dataset(synthesize_dataset(n, m, args.seed, schema), ".6f")


HANDLERS = {
    "rank": cmd_rank,
    "pillars": cmd_pillars,
    "weights": cmd_weights,
    "explain": cmd_explain,
    "validate": cmd_validate,
    "synth": cmd_synth,
}


def _emit(text: str, out: Optional[str]) -> None:
    data = text.encode("utf-8")
    if out is None:
        sys.stdout.flush()
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
        return
    try:
        Path(out).write_bytes(data)
    except OSError as exc:
        raise DataError(f"{out}: cannot write output: {exc}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on usage errors
    try:
        result = HANDLERS[args.command](args)
        code = 0
        if isinstance(result, tuple):
            result, code = result
        _emit(result, args.out)
        return code
    except PcaIndexError as exc:
        print(f"pca-index {args.command}: error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()

"""Indicator schemas, entity x indicator datasets, CSV IO and validation."""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Optional, Sequence

from .errors import (
    BadDirection,
    DuplicateEntityId,
    DuplicateIndicatorCode,
    EmptyInput,
    FewerThanTwoEntities,
    MalformedLine,
    MissingColumn,
    NoEntitiesRemain,
    UnparsableNumber,
)

DIRECTION_TOKENS = {"inc": "increasing", "dec": "decreasing"}

# dot decimal, optional exponent, no thousands separators
_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_INT = re.compile(r"[+-]?\d+")
_DIGITS = re.compile(r"\d+")


@dataclass(frozen=True)
class Indicator:
    code: str
    pillar: str
    direction: str = "increasing"
    label: str = ""


@dataclass(frozen=True)
class IndicatorSchema:
    entries: tuple[Indicator, ...]
    pillar_order: tuple[str, ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("schema needs at least one indicator")
        seen = set()
        for e in self.entries:
            if e.code in seen:
                raise DuplicateIndicatorCode(e.code)
            seen.add(e.code)
            if e.pillar not in self.pillar_order:
                raise ValueError(f"pillar {e.pillar!r} of {e.code} missing from pillar_order")
            if e.direction not in ("increasing", "decreasing"):
                raise BadDirection(f"{e.code}: direction must be increasing or decreasing")
        if len(set(self.pillar_order)) != len(self.pillar_order):
            raise ValueError("pillar_order has duplicates")

    @classmethod
    def from_entries(cls, entries: Iterable[Indicator]) -> "IndicatorSchema":
        entries = tuple(entries)
        order: list[str] = []
        for e in entries:
            if e.pillar not in order:
                order.append(e.pillar)
        return cls(entries, tuple(order))

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(e.code for e in self.entries)

    @property
    def directions(self) -> tuple[str, ...]:
        return tuple(e.direction for e in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def pillar_of(self, code: str) -> str:
        for e in self.entries:
            if e.code == code:
                return e.pillar
        raise KeyError(code)

    def codes_in(self, pillar: str) -> tuple[str, ...]:
        return tuple(e.code for e in self.entries if e.pillar == pillar)

    def pillar_sizes(self) -> dict[str, int]:
        return {p: len(self.codes_in(p)) for p in self.pillar_order}


def parse_schema(text: str) -> IndicatorSchema:
    """Parse ``pillar_code,indicator_code,direction[,label]`` lines.

    Blank lines and lines starting with ``#`` are skipped. The label is
    everything after the third comma and may itself contain commas.
    """
    entries = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",", 3)
        if len(parts) < 3:
            raise MalformedLine(lineno, "expected pillar_code,indicator_code,direction[,label]")
        pillar, code, token = (p.strip() for p in parts[:3])
        label = parts[3].strip() if len(parts) == 4 else ""
        if not pillar or not code:
            raise MalformedLine(lineno, "empty pillar or indicator code")
        if token not in DIRECTION_TOKENS:
            raise BadDirection(f"line {lineno}: direction {token!r} is not 'inc' or 'dec'")
        if code in seen:
            raise DuplicateIndicatorCode(code)
        seen.add(code)
        entries.append(Indicator(code, pillar, DIRECTION_TOKENS[token], label))
    if not entries:
        raise EmptyInput("schema contains no indicators")
    return IndicatorSchema.from_entries(entries)


def default_schema() -> IndicatorSchema:
    """The shipped 34-indicator, five-pillar schema (pillars A-E)."""
    text = resources.files("pca_index").joinpath("data/table1_schema.csv").read_text("utf-8")
    return parse_schema(text)


@dataclass(frozen=True)
class Dataset:
    """Raw indicator values; ``values[i][j]`` is indicator i for entity j.

    Missing cells hold NaN and are flagged in ``missing_mask``.
    """

    entity_ids: tuple[str, ...]
    indicator_codes: tuple[str, ...]
    values: tuple[tuple[float, ...], ...]
    missing_mask: tuple[tuple[bool, ...], ...] = None
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if self.missing_mask is None:
            mask = tuple(tuple(False for _ in row) for row in self.values)
            object.__setattr__(self, "missing_mask", mask)
        if len(set(self.entity_ids)) != len(self.entity_ids):
            dup = next(e for e in self.entity_ids if self.entity_ids.count(e) > 1)
            raise DuplicateEntityId(dup)
        if len(set(self.indicator_codes)) != len(self.indicator_codes):
            dup = next(c for c in self.indicator_codes if self.indicator_codes.count(c) > 1)
            raise DuplicateIndicatorCode(dup)
        m = len(self.entity_ids)
        if len(self.values) != len(self.indicator_codes) or any(len(r) != m for r in self.values):
            raise ValueError("values shape does not match indicator codes x entity ids")
        for i, row in enumerate(self.values):
            for j, v in enumerate(row):
                if not self.missing_mask[i][j] and not math.isfinite(v):
                    raise ValueError(
                        f"non-finite value for {self.indicator_codes[i]} / {self.entity_ids[j]}"
                    )

    @property
    def n(self) -> int:
        return len(self.indicator_codes)

    @property
    def m(self) -> int:
        return len(self.entity_ids)

    def has_missing(self, j: int) -> bool:
        return any(row[j] for row in self.missing_mask)

    def select_entities(self, keep: Sequence[int]) -> "Dataset":
        return Dataset(
            tuple(self.entity_ids[j] for j in keep),
            self.indicator_codes,
            tuple(tuple(row[j] for j in keep) for row in self.values),
            tuple(tuple(row[j] for j in keep) for row in self.missing_mask),
            self.warnings,
        )


def _parse_number(text: str, row: int, column: str) -> float:
    if not _NUMBER.fullmatch(text):
        raise UnparsableNumber(row, column, text)
    return float(text)


def _reject_comma_decimal(cells, header, lineno):
    # one surplus cell that rejoins into "3,5" is a comma decimal separator
    for k in range(1, len(cells) - 1):
        if _INT.fullmatch(cells[k].strip()) and _DIGITS.fullmatch(cells[k + 1].strip()):
            raise UnparsableNumber(lineno, header[k], f"{cells[k]},{cells[k + 1]}")


def parse_dataset(text: str, schema: IndicatorSchema) -> Dataset:
    """Parse a dataset CSV and align its columns to the schema's order.

    Header columns not named in the schema are ignored and reported in
    ``Dataset.warnings``. Empty cells become missing values.
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise EmptyInput("dataset is empty")
    header = [h.strip() for h in lines[0].split(",")]
    if header[0] != "entity_id":
        raise MalformedLine(1, "first header cell must be 'entity_id'")
    columns = header[1:]
    if len(set(columns)) != len(columns):
        dup = next(c for c in columns if columns.count(c) > 1)
        raise MalformedLine(1, f"duplicate header column {dup!r}")
    missing = [c for c in schema.codes if c not in columns]
    if missing:
        raise MissingColumn("schema indicator(s) absent from header: " + ", ".join(missing))
    warnings = tuple(f"ignored extra column {c!r}" for c in columns if c not in schema.codes)
    position = {c: k + 1 for k, c in enumerate(columns)}
    picks = [position[c] for c in schema.codes]

    ids: list[str] = []
    seen = set()
    rows: list[list[float]] = []
    masks: list[list[bool]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) == len(header) + 1:
            _reject_comma_decimal(cells, header, lineno)
        if len(cells) != len(header):
            raise MalformedLine(lineno, f"expected {len(header)} cells, got {len(cells)}")
        eid = cells[0].strip()
        if not eid:
            raise MalformedLine(lineno, "empty entity_id")
        if eid in seen:
            raise DuplicateEntityId(eid)
        seen.add(eid)
        ids.append(eid)
        vals, mask = [], []
        for k in picks:
            cell = cells[k].strip()
            if cell == "":
                vals.append(math.nan)
                mask.append(True)
            else:
                vals.append(_parse_number(cell, lineno, header[k]))
                mask.append(False)
        rows.append(vals)
        masks.append(mask)

    n = len(picks)
    values = tuple(tuple(r[i] for r in rows) for i in range(n))
    mask = tuple(tuple(r[i] for r in masks) for i in range(n))
    return Dataset(tuple(ids), schema.codes, values, mask, warnings)


def write_dataset(dataset: Dataset, float_format: Optional[str] = None) -> str:
    """Canonical CSV text (LF endings). Floats use ``repr`` unless a format is given."""
    fmt = (lambda v: repr(float(v))) if float_format is None else (lambda v: format(v, float_format))
    out = [",".join(("entity_id",) + dataset.indicator_codes)]
    for j, eid in enumerate(dataset.entity_ids):
        cells = [eid]
        for i in range(dataset.n):
            cells.append("" if dataset.missing_mask[i][j] else fmt(dataset.values[i][j]))
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class ValidationReport:
    dataset: Dataset
    excluded: tuple[str, ...]
    constant_indicators: tuple[str, ...]
    constant_policy: str = "error"
    warnings: tuple[str, ...] = field(default=())

    @property
    def fatal(self) -> bool:
        return bool(self.constant_indicators) and self.constant_policy == "error"

    def render(self) -> str:
        lines = [f"{len(self.excluded)} entities excluded"]
        lines += [f"excluded: {e}" for e in self.excluded]
        lines.append(f"{self.dataset.m} entities retained")
        lines.append(f"{len(self.constant_indicators)} constant indicators")
        lines += [f"constant: {c}" for c in self.constant_indicators]
        lines += [f"warning: {w}" for w in self.warnings]
        if self.fatal:
            lines.append("error: constant indicators with constant policy 'error'")
        return "\n".join(lines) + "\n"


def validate(dataset: Dataset, schema: IndicatorSchema, options=None) -> ValidationReport:
    """Drop entities with any missing value and flag constant indicators.

    Raises when no entity (or just one) survives. Constant indicators are
    only reported here; ``ValidationReport.fatal`` says whether the chosen
    constant-column policy rejects them.
    """
    if dataset.indicator_codes != schema.codes:
        raise MissingColumn("dataset indicators do not match schema order")
    keep = [j for j in range(dataset.m) if not dataset.has_missing(j)]
    excluded = tuple(dataset.entity_ids[j] for j in range(dataset.m) if dataset.has_missing(j))
    if not keep:
        raise NoEntitiesRemain(f"all {dataset.m} entities have missing values")
    filtered = dataset if len(keep) == dataset.m else dataset.select_entities(keep)
    if filtered.m < 2:
        raise FewerThanTwoEntities(f"only {filtered.m} entity remains after exclusions")
    constant = tuple(
        code for code, row in zip(filtered.indicator_codes, filtered.values) if min(row) == max(row)
    )
    policy = getattr(options, "constant_policy", "error")
    return ValidationReport(filtered, excluded, constant, policy, dataset.warnings)


def synthesize_dataset(n: int, m: int, seed: int, schema: IndicatorSchema) -> Dataset:
    """Deterministic synthetic data: one latent factor per pillar plus noise.

    Each indicator loads on its pillar's factor with strength drawn from
    [0.5, 0.9]; values are rounded to six decimals so they survive a
    fixed-format CSV round trip unchanged.
    """
    if n != len(schema):
        raise ValueError(f"n={n} does not match schema size {len(schema)}")
    if m < 2:
        raise FewerThanTwoEntities("synthetic dataset needs m >= 2")
    rng = random.Random(seed)
    factors = {p: [rng.gauss(0.0, 1.0) for _ in range(m)] for p in schema.pillar_order}
    values = []
    for e in schema.entries:
        a = rng.uniform(0.5, 0.9)
        b = math.sqrt(1.0 - a * a)
        level = rng.uniform(20.0, 80.0)
        scale = rng.uniform(2.0, 15.0)
        f = factors[e.pillar]
        values.append(
            tuple(round(level + scale * (a * f[j] + b * rng.gauss(0.0, 1.0)), 6) for j in range(m))
        )
    width = len(str(m))
    ids = tuple(f"E{j + 1:0{width}d}" for j in range(m))
    return Dataset(ids, schema.codes, tuple(values))

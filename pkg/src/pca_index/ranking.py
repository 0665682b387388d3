"""League-table style rankings of index scores."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

from .errors import KTooLarge, NonFiniteScore, UnknownPillar


class RankedRow(NamedTuple):
    rank: int
    entity_id: str
    score: float


@dataclass(frozen=True)
class RankedTable:
    rows: tuple[RankedRow, ...]
    tie_policy: str = "competition"

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __getitem__(self, item):
        return self.rows[item]


def _order_key(item):
    eid, score = item
    return (-score, eid.encode("utf-8"))


def assign_ranks(scores: Mapping[str, float], tie_policy: str = "competition") -> RankedTable:
    """Sort by descending score, ties by entity id (byte order).

    ``competition`` gives tied scores the same rank and skips ahead
    afterwards ("1224"); ``ordinal`` numbers rows 1..m. Scores are compared
    exactly.
    """
    if tie_policy not in ("competition", "ordinal"):
        raise ValueError(f"unknown tie policy {tie_policy!r}")
    for eid, s in scores.items():
        if not math.isfinite(s):
            raise NonFiniteScore(f"score for {eid} is {s!r}")
    ordered = sorted(scores.items(), key=_order_key)
    rows = []
    prev = None
    rank = 0
    for pos, (eid, s) in enumerate(ordered, start=1):
        if tie_policy == "ordinal" or s != prev:
            rank = pos
        prev = s
        rows.append(RankedRow(rank, eid, s))
    return RankedTable(tuple(rows), tie_policy)


def top_bottom(table: RankedTable, k: int) -> tuple[RankedTable, RankedTable]:
    """Leaders (first k rows) and outsiders (last k rows), in table order."""
    m = len(table)
    if k < 1:
        raise ValueError("k must be positive")
    if k > m:
        raise KTooLarge(f"k={k} exceeds table size {m}")
    return (
        RankedTable(table.rows[:k], table.tie_policy),
        RankedTable(table.rows[m - k:], table.tie_policy),
    )


def pillar_leaders(
    pillar_indices: Mapping[str, Mapping[str, float]],
    pillar: str,
    k: int,
    tie_policy: str = "competition",
) -> RankedTable:
    """Top-k ranked rows of one pillar's scores (``pillar -> entity -> score``)."""
    if pillar not in pillar_indices:
        raise UnknownPillar(f"unknown pillar {pillar!r}")
    scores = pillar_indices[pillar]
    if k > len(scores):
        raise KTooLarge(f"k={k} exceeds {len(scores)} entities")
    if k < 1:
        raise ValueError("k must be positive")
    table = assign_ranks(scores, tie_policy)
    return RankedTable(table.rows[:k], tie_policy)

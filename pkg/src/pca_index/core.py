"""Composite index from squared PCA loadings weighted by explained variance.

Pipeline: min-max normalize every indicator onto [1, 10], take the
covariance of the normalized rows, eigendecompose it, and score each entity
as ``I_j = sum_k rho_k * y_kj`` with ``y_kj = sum_i l_ki**2 * x_ij``. Since
every squared eigenvector sums to one, ``y_kj`` and ``I_j`` are convex
combinations of normalized values and stay inside [1, 10].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Mapping, Optional, Sequence

from .dataset import Dataset, IndicatorSchema
from .errors import (
    BadBounds,
    ConstantIndicator,
    DimensionMismatch,
    NonFiniteInput,
    UnassignedIndicator,
)
from .linalg import EigenDecomposition, Matrix, covariance_matrix, jacobi_eigh

LOW, HIGH = 1.0, 10.0
MIDPOINT = 5.5


@dataclass(frozen=True)
class RunOptions:
    """Every choice the method leaves open. Defaults are the faithful setting."""

    divisor: Literal["population", "sample"] = "population"
    constant_policy: Literal["error", "drop", "midpoint"] = "error"
    pillar_mode: Literal["global", "local"] = "global"
    # None means sample min/max; otherwise code -> (min, max)
    bounds: Optional[Mapping[str, tuple[float, float]]] = None
    tie_policy: Literal["competition", "ordinal"] = "competition"
    eig_tol: float = 1e-12
    max_sweeps: int = 100

    def __post_init__(self):
        checks = {
            "divisor": ("population", "sample"),
            "constant_policy": ("error", "drop", "midpoint"),
            "pillar_mode": ("global", "local"),
            "tie_policy": ("competition", "ordinal"),
        }
        for name, allowed in checks.items():
            if getattr(self, name) not in allowed:
                raise ValueError(f"{name} must be one of {allowed}, got {getattr(self, name)!r}")
        if self.bounds is not None:
            for code, (lo, hi) in self.bounds.items():
                if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
                    raise BadBounds(f"bounds for {code} need finite min < max, got ({lo}, {hi})")
        if not self.eig_tol > 0 or self.max_sweeps < 1:
            raise ValueError("eig_tol must be > 0 and max_sweeps >= 1")


@dataclass(frozen=True)
class NormalizedMatrix:
    values: Matrix
    indicator_codes: tuple[str, ...]
    entity_ids: tuple[str, ...]
    dropped: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def m(self) -> int:
        return len(self.entity_ids)

    def subset(self, codes: Sequence[str]) -> "NormalizedMatrix":
        pos = {c: i for i, c in enumerate(self.indicator_codes)}
        return NormalizedMatrix(
            tuple(self.values[pos[c]] for c in codes), tuple(codes), self.entity_ids
        )


@dataclass(frozen=True)
class ModifiedScores:
    values: Matrix


@dataclass(frozen=True)
class IndexReport:
    normalized: NormalizedMatrix
    decomposition: EigenDecomposition
    modified_scores: ModifiedScores
    effective_weights: tuple[float, ...]
    index: tuple[float, ...]
    pillar_indices: dict[str, tuple[float, ...]]
    options: RunOptions
    empty_pillars: tuple[str, ...] = ()
    schema: Optional[IndicatorSchema] = field(default=None, repr=False)

    @property
    def entity_ids(self) -> tuple[str, ...]:
        return self.normalized.entity_ids

    @property
    def dropped(self) -> tuple[str, ...]:
        return self.normalized.dropped

    def scores(self) -> dict[str, float]:
        return dict(zip(self.entity_ids, self.index))

    def pillar_scores(self, pillar: str) -> dict[str, float]:
        return dict(zip(self.entity_ids, self.pillar_indices[pillar]))


def _affine(lo: float, hi: float, decreasing: bool):
    span = hi - lo
    if decreasing:
        return lambda x: LOW + 9.0 * ((hi - x) / span)
    return lambda x: LOW + 9.0 * ((x - lo) / span)


def normalize(
    raw: Sequence[Sequence[float]],
    directions: Sequence[str],
    bounds: Optional[Mapping[str, tuple[float, float]]] = None,
    constant_policy: str = "error",
    codes: Optional[Sequence[str]] = None,
    entity_ids: Optional[Sequence[str]] = None,
) -> NormalizedMatrix:
    """Map every indicator row onto [1, 10], best value to 10.

    With sample bounds an increasing row sends its minimum to 1 and maximum
    to 10; a decreasing row the reverse. Explicit ``bounds`` (keyed by code)
    fix the endpoints instead and out-of-range results are clamped.
    Constant rows under sample bounds follow ``constant_policy``.
    """
    n = len(raw)
    if len(directions) != n:
        raise DimensionMismatch(f"{len(directions)} directions for {n} indicators")
    codes = tuple(codes) if codes is not None else tuple(f"x{i + 1}" for i in range(n))
    m = len(raw[0]) if n else 0
    entity_ids = tuple(entity_ids) if entity_ids is not None else tuple(str(j) for j in range(m))
    if len(codes) != n or len(entity_ids) != m or any(len(r) != m for r in raw):
        raise DimensionMismatch("raw matrix shape does not match codes / entity ids")
    for i, row in enumerate(raw):
        for j, v in enumerate(row):
            if not math.isfinite(v):
                raise NonFiniteInput(f"non-finite value for {codes[i]} / {entity_ids[j]}")

    if bounds is None:
        constant = [codes[i] for i, row in enumerate(raw) if min(row) == max(row)]
        if constant and constant_policy == "error":
            raise ConstantIndicator(constant)
    else:
        constant = []
        absent = [c for c in codes if c not in bounds]
        if absent:
            raise BadBounds("no explicit bounds for: " + ", ".join(absent))

    out, kept, dropped = [], [], []
    for i, row in enumerate(raw):
        code = codes[i]
        decreasing = directions[i] == "decreasing"
        if bounds is not None:
            lo, hi = bounds[code]
            f = _affine(lo, hi, decreasing)
            out.append(tuple(min(HIGH, max(LOW, f(x))) for x in row))
        elif code in constant:
            if constant_policy == "drop":
                dropped.append(code)
                continue
            out.append(tuple(MIDPOINT for _ in row))
        else:
            f = _affine(min(row), max(row), decreasing)
            out.append(tuple(f(x) for x in row))
        kept.append(code)
    return NormalizedMatrix(tuple(out), tuple(kept), entity_ids, tuple(dropped))


def _weighted_rows(coeffs: Sequence[float], rows: Sequence[Sequence[float]], m: int) -> tuple[float, ...]:
    # per-entity sum over rows in ascending index order
    acc = [0.0] * m
    for c, row in zip(coeffs, rows):
        acc = [a + c * x for a, x in zip(acc, row)]
    return tuple(acc)


def _clamped(values: Sequence[float]) -> tuple[float, ...]:
    # convex combinations of [1, 10] values; only rounding can leave the range
    return tuple(HIGH if v > HIGH else LOW if v < LOW else v for v in values)


def modified_scores(loadings: Sequence[Sequence[float]], normalized: NormalizedMatrix) -> ModifiedScores:
    """y[k][j] = sum_i loadings[k][i]**2 * normalized[i][j]."""
    n = normalized.n
    if len(loadings) != n or any(len(row) != n for row in loadings):
        raise DimensionMismatch(f"loadings must be {n}x{n} to match the normalized matrix")
    m = normalized.m
    return ModifiedScores(
        tuple(
            _clamped(_weighted_rows([l * l for l in row], normalized.values, m)) for row in loadings
        )
    )


def effective_weights(decomposition: EigenDecomposition) -> tuple[float, ...]:
    """Per-indicator weight w_i = sum_k rho_k * l_ki**2 (nonnegative, sums to 1)."""
    n = decomposition.order
    w = [0.0] * n
    for rho, row in zip(decomposition.shares, decomposition.loadings):
        w = [acc + rho * (l * l) for acc, l in zip(w, row)]
    return tuple(w)


def aggregate_index(weights: Sequence[float], normalized: NormalizedMatrix) -> tuple[float, ...]:
    """I_j = sum_i w_i * x_ij."""
    if len(weights) != normalized.n:
        raise DimensionMismatch(f"{len(weights)} weights for {normalized.n} indicators")
    return _clamped(_weighted_rows(weights, normalized.values, normalized.m))


def index_from_scores(shares: Sequence[float], scores: ModifiedScores) -> tuple[float, ...]:
    """I_j = sum_k rho_k * y_kj; the component-wise route to the same index."""
    if len(shares) != len(scores.values):
        raise DimensionMismatch(f"{len(shares)} shares for {len(scores.values)} components")
    m = len(scores.values[0]) if scores.values else 0
    return _clamped(_weighted_rows(shares, scores.values, m))


def decompose(normalized: NormalizedMatrix, options: RunOptions) -> EigenDecomposition:
    cov = covariance_matrix(normalized.values, options.divisor)
    return jacobi_eigh(cov, options.eig_tol, options.max_sweeps)


def pillar_subindices(
    normalized: NormalizedMatrix,
    weights: Sequence[float],
    schema: IndicatorSchema,
    mode: str = "global",
    options: Optional[RunOptions] = None,
) -> tuple[dict[str, tuple[float, ...]], tuple[str, ...]]:
    """Pillar sub-indices and the list of pillars left without indicators.

    ``global`` restricts the overall weighted sum to each pillar, so the
    pillars add up to the index. ``local`` reruns the decomposition on each
    pillar's indicators alone and yields a standalone [1, 10] score.
    """
    options = options or RunOptions()
    assigned = set(schema.codes)
    stray = [c for c in normalized.indicator_codes if c not in assigned]
    if stray:
        raise UnassignedIndicator("indicator(s) not in any pillar: " + ", ".join(stray))
    if len(weights) != normalized.n:
        raise DimensionMismatch(f"{len(weights)} weights for {normalized.n} indicators")

    present = set(normalized.indicator_codes)
    result: dict[str, tuple[float, ...]] = {}
    empty = []
    for pillar in schema.pillar_order:
        codes = [c for c in schema.codes_in(pillar) if c in present]
        if not codes:
            empty.append(pillar)
            continue
        if mode == "global":
            pos = {c: i for i, c in enumerate(normalized.indicator_codes)}
            idx = [pos[c] for c in codes]
            result[pillar] = _weighted_rows(
                [weights[i] for i in idx], [normalized.values[i] for i in idx], normalized.m
            )
        elif mode == "local":
            sub = normalized.subset(codes)
            result[pillar] = aggregate_index(effective_weights(decompose(sub, options)), sub)
        else:
            raise ValueError(f"unknown pillar mode {mode!r}")
    return result, tuple(empty)


def compute_competitiveness(
    dataset: Dataset, schema: IndicatorSchema, options: Optional[RunOptions] = None
) -> IndexReport:
    """Run the full pipeline on a validated dataset (no missing values)."""
    options = options or RunOptions()
    if dataset.indicator_codes != schema.codes:
        raise DimensionMismatch("dataset indicators are not in schema order")
    for i, row in enumerate(dataset.missing_mask):
        for j, missing in enumerate(row):
            if missing:
                raise NonFiniteInput(
                    f"missing value for {dataset.indicator_codes[i]} / {dataset.entity_ids[j]};"
                    " validate the dataset first"
                )
    normalized = normalize(
        dataset.values,
        schema.directions,
        options.bounds,
        options.constant_policy,
        dataset.indicator_codes,
        dataset.entity_ids,
    )
    if normalized.n == 0:
        raise ConstantIndicator(normalized.dropped)
    decomposition = decompose(normalized, options)
    scores = modified_scores(decomposition.loadings, normalized)
    weights = effective_weights(decomposition)
    index = aggregate_index(weights, normalized)
    pillars, empty = pillar_subindices(normalized, weights, schema, options.pillar_mode, options)
    return IndexReport(
        normalized, decomposition, scores, weights, index, pillars, options, empty, schema
    )

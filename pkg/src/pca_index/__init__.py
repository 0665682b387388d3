"""Composite indicator engine based on generalized modified PCA."""

from .core import (
    IndexReport,
    ModifiedScores,
    NormalizedMatrix,
    RunOptions,
    aggregate_index,
    compute_competitiveness,
    effective_weights,
    index_from_scores,
    modified_scores,
    normalize,
    pillar_subindices,
)
from .dataset import (
    Dataset,
    Indicator,
    IndicatorSchema,
    ValidationReport,
    default_schema,
    parse_dataset,
    parse_schema,
    synthesize_dataset,
    validate,
    write_dataset,
)
from .linalg import EigenDecomposition, SymmetricMatrix, covariance_matrix, jacobi_eigh, sort_eigenpairs
from .ranking import RankedRow, RankedTable, assign_ranks, pillar_leaders, top_bottom

__version__ = "0.1.0"

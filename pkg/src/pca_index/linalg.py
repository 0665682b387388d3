"""Dense symmetric linear algebra in pure Python.

Matrices are tuples of row tuples of floats. Every reduction runs in plain
index order so identical inputs give bit-identical outputs on any platform
with IEEE-754 doubles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    FewerThanTwoEntities,
    IndefiniteMatrix,
    LengthMismatch,
    NoConvergence,
    NonFiniteInput,
)

Matrix = tuple[tuple[float, ...], ...]

#: relative clamp for tiny negative eigenvalues (times the trace)
CLAMP_RELATIVE = 1e-9


def _check_finite(rows: Sequence[Sequence[float]]) -> None:
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            if not math.isfinite(v):
                raise NonFiniteInput(f"non-finite value {v!r} at ({i}, {j})")


@dataclass(frozen=True)
class SymmetricMatrix:
    """Square symmetric matrix with exactly mirrored entries."""

    values: Matrix

    def __post_init__(self):
        n = len(self.values)
        if n == 0:
            raise LengthMismatch("matrix must have order >= 1")
        for row in self.values:
            if len(row) != n:
                raise LengthMismatch("matrix is not square")
        _check_finite(self.values)
        for i in range(n):
            for j in range(i + 1, n):
                if self.values[i][j] != self.values[j][i]:
                    raise ValueError("matrix is not symmetric; use SymmetricMatrix.from_rows")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "SymmetricMatrix":
        """Build from any square array, averaging mirrored entries."""
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise LengthMismatch("matrix must be square and non-empty")
        _check_finite(rows)
        out = [[float(v) for v in row] for row in rows]
        for i in range(n):
            for j in range(i + 1, n):
                a, b = out[i][j], out[j][i]
                v = a if a == b else 0.5 * a + 0.5 * b
                out[i][j] = out[j][i] = v
        return cls(tuple(tuple(r) for r in out))

    @property
    def order(self) -> int:
        return len(self.values)

    def trace(self) -> float:
        t = 0.0
        for i in range(self.order):
            t += self.values[i][i]
        return t

    def scaled(self, c: float) -> "SymmetricMatrix":
        return SymmetricMatrix(tuple(tuple(c * v for v in row) for row in self.values))


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenpairs sorted by descending eigenvalue.

    ``loadings[k]`` is the unit eigenvector for ``eigenvalues[k]`` and
    ``shares[k]`` its fraction of the total variance.
    """

    eigenvalues: tuple[float, ...]
    loadings: Matrix
    shares: tuple[float, ...]

    @property
    def order(self) -> int:
        return len(self.eigenvalues)


def covariance_matrix(data: Sequence[Sequence[float]], divisor_policy: str = "population") -> SymmetricMatrix:
    """Covariance between the rows of an n x m matrix (rows are variables).

    ``divisor_policy`` is ``"population"`` (divide by m) or ``"sample"``
    (divide by m - 1).
    """
    if divisor_policy not in ("population", "sample"):
        raise ValueError(f"unknown divisor policy {divisor_policy!r}")
    n = len(data)
    if n == 0:
        raise LengthMismatch("data has no rows")
    m = len(data[0])
    if any(len(row) != m for row in data):
        raise LengthMismatch("data rows have unequal length")
    if m < 2:
        raise FewerThanTwoEntities(f"covariance needs at least 2 columns, got {m}")
    _check_finite(data)

    centered = []
    for row in data:
        s = 0.0
        for v in row:
            s += v
        mean = s / m
        centered.append([v - mean for v in row])

    div = float(m if divisor_policy == "population" else m - 1)
    out = [[0.0] * n for _ in range(n)]
    for i in range(n):
        di = centered[i]
        for j in range(i, n):
            dj = centered[j]
            s = 0.0
            for a, b in zip(di, dj):
                s += a * b
            out[i][j] = out[j][i] = s / div
    return SymmetricMatrix(tuple(tuple(r) for r in out))


def sort_eigenpairs(raw_eigenvalues: Sequence[float], raw_loadings: Sequence[Sequence[float]]):
    """Stable descending sort of eigenvalues with their loading rows."""
    if len(raw_eigenvalues) != len(raw_loadings):
        raise LengthMismatch(
            f"{len(raw_eigenvalues)} eigenvalues but {len(raw_loadings)} loading rows"
        )
    order = sorted(range(len(raw_eigenvalues)), key=lambda k: -raw_eigenvalues[k])
    return (
        tuple(raw_eigenvalues[k] for k in order),
        tuple(tuple(raw_loadings[k]) for k in order),
    )


def _fix_sign(row: list[float]) -> list[float]:
    # first nonzero component made positive
    for v in row:
        if v != 0.0:
            return [-x for x in row] if v < 0.0 else row
    return row


def variance_shares(eigenvalues: Sequence[float]) -> tuple[float, ...]:
    total = 0.0
    for lam in eigenvalues:
        total += lam
    n = len(eigenvalues)
    if total <= 0.0:
        # no variance at all: every component gets the same share
        return tuple(1.0 / n for _ in range(n))
    return tuple(lam / total for lam in eigenvalues)


def jacobi_eigh(matrix: SymmetricMatrix, tol: float = 1e-12, max_sweeps: int = 100) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric PSD matrix by cyclic Jacobi.

    Pivots are visited row-major over the upper triangle. The first three
    sweeps skip rotations below a threshold; from the fifth sweep on,
    off-diagonal entries negligible against both diagonal entries are set to
    zero. Converged when the largest off-diagonal magnitude is <= ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be a positive integer")

    n = matrix.order
    a = [list(row) for row in matrix.values]
    vt = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]

    def off_max() -> float:
        mx = 0.0
        for p in range(n - 1):
            row = a[p]
            for q in range(p + 1, n):
                v = abs(row[q])
                if v > mx:
                    mx = v
        return mx

    sweep = 0
    while True:
        if off_max() <= tol:
            break
        if sweep >= max_sweeps:
            raise NoConvergence(
                f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal {off_max():.3e})"
            )
        sweep += 1
        off_sum = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off_sum += abs(a[p][q])
        thresh = 0.2 * off_sum / (n * n) if sweep < 4 else 0.0

        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                g = 100.0 * abs(apq)
                app, aqq = a[p][p], a[q][q]
                if sweep > 4 and abs(app) + g == abs(app) and abs(aqq) + g == abs(aqq):
                    a[p][q] = a[q][p] = 0.0
                    continue
                if abs(apq) <= thresh:
                    continue
                h = aqq - app
                if abs(h) + g == abs(h):
                    t = apq / h
                else:
                    theta = 0.5 * h / apq
                    t = 1.0 / (abs(theta) + math.sqrt(1.0 + theta * theta))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c

                rp, rq = a[p], a[q]
                new_p = [c * x - s * y for x, y in zip(rp, rq)]
                new_q = [s * x + c * y for x, y in zip(rp, rq)]
                new_p[p] = app - t * apq
                new_q[q] = aqq + t * apq
                new_p[q] = 0.0
                new_q[p] = 0.0
                a[p], a[q] = new_p, new_q
                for r in range(n):
                    if r != p and r != q:
                        row = a[r]
                        row[p] = new_p[r]
                        row[q] = new_q[r]

                vp, vq = vt[p], vt[q]
                vt[p] = [c * x - s * y for x, y in zip(vp, vq)]
                vt[q] = [s * x + c * y for x, y in zip(vp, vq)]

    trace = matrix.trace()
    clamp = CLAMP_RELATIVE * trace if trace > 0.0 else 0.0
    eig = []
    for k in range(n):
        lam = a[k][k]
        if lam < 0.0:
            if lam < -clamp:
                raise IndefiniteMatrix(
                    f"eigenvalue {lam:.6e} below clamp tolerance {-clamp:.3e}; not a covariance matrix"
                )
            lam = 0.0
        eig.append(lam)

    values, loadings = sort_eigenpairs(eig, [_fix_sign(row) for row in vt])
    return EigenDecomposition(values, loadings, variance_shares(values))

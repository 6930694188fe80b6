"""Dense float64 matrices.

A `Matrix` is a two dimensional, C-ordered `numpy.ndarray` of float64 whose
entries are all finite. The helpers here are the only place that checks the
invariant; everything downstream passes plain arrays around.
"""
from __future__ import annotations

from typing import Final

import numpy as np
from numpy import ndarray

from .._algae.exceptions import ContractViolation, NumericOverflow
from .._algae.utils import isfiniteall, raiseif

Matrix = ndarray

DTYPE: Final = np.float64


def as_matrix(values, name: str = 'matrix') -> Matrix:
    """Coerces `values` into a finite float64 `Matrix`.

    Parameters:
        - `values` : array-like of rank 1 or 2 (rank 1 becomes a single row)
        - `name` : `str` used in error messages

    Raises:
        - `ContractViolation` : wrong rank or non-finite entries.
    """
    matrix = np.array(values, dtype=DTYPE, order='C', copy=True)

    if matrix.ndim == 1:
        matrix = matrix.reshape(1, -1)

    raiseif(
        matrix.ndim != 2,
        ContractViolation(f':[{name}]: Expected a matrix, got rank {matrix.ndim}.')
    )
    raiseif(
        not isfiniteall(matrix),
        ContractViolation(f':[{name}]: Matrix has non-finite entries.')
    )

    return matrix


def identity(n: int) -> Matrix:
    return np.eye(n, dtype=DTYPE)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Standard matrix product.

    Raises:
        - `ContractViolation` : `a.cols != b.rows`.
        - `NumericOverflow` : a non-finite result.
    """
    raiseif(
        a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0],
        ContractViolation(f':[{a.shape}x{b.shape}]: Dimension mismatch.')
    )

    product = np.matmul(a, b)

    raiseif(
        not isfiniteall(product),
        NumericOverflow(f':[{a.shape}x{b.shape}]: Product overflowed.')
    )

    return product

"""
Matrix products, spectral radii and the benchmark matrix sets.

Eigenvalues of matrices larger than 2x2 are computed in-repo: Householder
reduction to upper Hessenberg form followed by a complex single-shift QR
iteration with Wilkinson shifts and bottom-up deflation.
"""

import cmath
import logging
import math
from typing import Sequence, Union

import numpy as np

from jsrlab.errors import InvalidWordError, NumericError, ShapeError, DomainError
from jsrlab.schemas.matrix_set import Matrix, MatrixSet, SwitchingWord

logger = logging.getLogger(__name__)

MatrixLike = Union[Matrix, np.ndarray]

_EPS = np.finfo(float).eps

# Literals of the 2-D benchmark, kept as written and converted once.
_SIGMA2_LITERALS = (
    (("1.5519", "0.4474"), ("7.6412", "7.4716")),
    (("0.4750", "9.1755"), ("1.8955", "0.1850")),
)


def _as_square_array(matrix: MatrixLike) -> np.ndarray:
    array = matrix.to_array() if isinstance(matrix, Matrix) else np.asarray(matrix, dtype=float)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise ShapeError(f"Expected a square matrix, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise NumericError(
            "Matrix has non-finite entries; spectral quantities are undefined.\n"
            "Check the matrix set for overflow or NaN values."
        )
    return array


def product_of_word(matrix_set: MatrixSet, word: Union[SwitchingWord, Sequence[int]]) -> Matrix:
    """
    Product A_{σ(1)} · A_{σ(2)} · ... · A_{σ(k)} for a 1-based switching word.

    Raises:
        InvalidWordError: if the word is empty or an index is outside 1..M
    """
    indices = list(word.indices) if isinstance(word, SwitchingWord) else list(word)
    if not indices:
        raise InvalidWordError("Switching word is empty; a word needs at least one index")
    invalid = [i for i in indices if not 1 <= i <= matrix_set.M]
    if invalid:
        raise InvalidWordError(
            f"Switching word {indices} uses indices {invalid} outside 1..{matrix_set.M}.\n"
            f"Indices are 1-based and must refer to a matrix of the set."
        )

    arrays = matrix_set.arrays()
    product = arrays[indices[0] - 1]
    for index in indices[1:]:
        product = product @ arrays[index - 1]
    return Matrix.from_array(product)


def _spectral_radius_2x2(a: np.ndarray) -> float:
    half_trace = 0.5 * (a[0, 0] + a[1, 1])
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    disc = half_trace * half_trace - det
    if disc < 0:
        # complex pair: |λ|² = det
        return math.sqrt(det)
    return abs(half_trace) + math.sqrt(disc)


def _hessenberg(a: np.ndarray) -> np.ndarray:
    """Householder reduction to upper Hessenberg form (similarity transform)."""
    h = np.array(a, dtype=float)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        v = x
        v[0] += math.copysign(alpha, x[0])
        v /= np.linalg.norm(v)
        h[k + 1:, :] -= 2.0 * np.outer(v, v @ h[k + 1:, :])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v)
    return np.triu(h, -1)


def _wilkinson_shift(block: np.ndarray) -> complex:
    a, b = block[0, 0], block[0, 1]
    c, d = block[1, 0], block[1, 1]
    root = cmath.sqrt(0.25 * (a - d) ** 2 + b * c)
    mu1 = 0.5 * (a + d) + root
    mu2 = 0.5 * (a + d) - root
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def eigenvalues(matrix: MatrixLike, max_iter: int = 200) -> np.ndarray:
    """
    All eigenvalues of a real square matrix (complex array, unordered).

    Raises:
        NumericError: on non-finite input or if QR iteration fails to deflate
            an eigenvalue within ``max_iter`` sweeps
    """
    a = _as_square_array(matrix)
    n = a.shape[0]
    if n == 1:
        return a.astype(complex).ravel()

    h = _hessenberg(a).astype(complex)
    scale = float(np.abs(h).max())
    if scale == 0.0:
        return np.zeros(n, dtype=complex)

    found = []
    active = n
    sweeps = 0
    while active > 1:
        last = active - 1
        sub = abs(h[last, last - 1])
        diag = abs(h[last, last]) + abs(h[last - 1, last - 1])
        if sub <= _EPS * diag or sub <= _EPS * scale:
            found.append(h[last, last])
            active -= 1
            sweeps = 0
            continue
        if sweeps >= max_iter:
            raise NumericError(
                f"QR iteration did not converge after {max_iter} sweeps "
                f"(active block {active}x{active}, subdiagonal {sub:.3e})."
            )

        shift = _wilkinson_shift(h[last - 1:active, last - 1:active])
        if sweeps and sweeps % 11 == 0:
            # exceptional shift breaks stagnation cycles
            shift = h[last, last] + sub
        identity = np.eye(active)
        q, r = np.linalg.qr(h[:active, :active] - shift * identity)
        h[:active, :active] = np.triu(r @ q, -1) + shift * identity
        sweeps += 1

    found.append(h[0, 0])
    return np.array(found[::-1], dtype=complex)


def spectral_radius(matrix: MatrixLike) -> float:
    """
    Largest eigenvalue modulus of a real square matrix.

    Closed form for n <= 2, Hessenberg-QR eigenvalues otherwise.

    Raises:
        NumericError: if the matrix has non-finite entries
    """
    a = _as_square_array(matrix)
    n = a.shape[0]
    if n == 1:
        return abs(float(a[0, 0]))
    if n == 2:
        return _spectral_radius_2x2(a)
    return float(np.abs(eigenvalues(a)).max())


def benchmark_sigma2() -> MatrixSet:
    """The 2-D two-mode benchmark with known JSR 8.6881."""
    matrices = [[[float(v) for v in row] for row in literal] for literal in _SIGMA2_LITERALS]
    return MatrixSet(n=2, matrices=matrices, name="sigma2")


def benchmark_family(n: int) -> MatrixSet:
    """
    n-dimensional n-mode benchmark with JSR 1.

    A_1 = 1·e_1ᵀ (every entry of column 1 equal to one). For i = 2..n, A_i is
    zero except column i, which holds -1 on the diagonal and 1 elsewhere.
    """
    if n < 2:
        raise DomainError(f"The column benchmark family needs n >= 2 (got {n})")
    matrices = []
    first = np.zeros((n, n))
    first[:, 0] = 1.0
    matrices.append(first)
    for i in range(1, n):
        a = np.zeros((n, n))
        a[:, i] = 1.0
        a[i, i] = -1.0
        matrices.append(a)
    name = "sigma8" if n == 8 else f"family:{n}"
    return MatrixSet.from_arrays(matrices, name=name)


def benchmark_sigma8() -> MatrixSet:
    """The 8-D eight-mode benchmark with JSR 1."""
    return benchmark_family(8)


__all__ = [
    "product_of_word",
    "spectral_radius",
    "eigenvalues",
    "benchmark_sigma2",
    "benchmark_sigma8",
    "benchmark_family",
]

"""
Classical JSR bounds.

- lower_bound_products: max over words w of length <= K of ρ(A_w)^{1/|w|}
- ellipsoidal_upper_bound: max_i ‖A_i‖_P for a quadratic norm P found by
  subgradient descent on the factor L of P = L·Lᵀ

Any P ≻ 0 yields a valid upper bound, so the optimizer only affects how tight
the ellipsoidal bound is, never whether it holds.
"""

import logging
import math
import time
from typing import Optional

import numpy as np

from jsrlab.errors import DomainError, EnumerationTooLargeError
from jsrlab.schemas.bounds import BoundKind, BoundReport, EllipsoidalNorm
from jsrlab.schemas.matrix_set import MatrixSet
from jsrlab.tools.matset import spectral_radius
from jsrlab.tools.settings import get_runtime_config

logger = logging.getLogger(__name__)


# ============================================================================
# Product lower bound
# ============================================================================

def lower_bound_products(
    matrix_set: MatrixSet,
    max_length: int,
    cap: Optional[int] = None,
    prune: bool = False,
) -> BoundReport:
    """
    Lower bound max_{k <= max_length} max_{A ∈ Σ^k} ρ(A)^{1/k}.

    Words are enumerated depth first, reusing prefix products. With
    ``prune=True`` a subtree is skipped when

        (‖A_w‖₂ · β^j)^{1/(|w|+j)} <= best   for every remaining length j,

    where β = max_i ‖A_i‖₂; the bound follows from submultiplicativity, so
    pruning never changes the result.

    Args:
        matrix_set: The set Σ
        max_length: Longest word length K (>= 1)
        cap: Largest admissible M**K; defaults to JSRLAB_ENUM_CAP (10**7)
        prune: Enable norm-based subtree pruning

    Returns:
        BoundReport of kind ``lower``; ``meta['word']`` holds the achieving
        1-based word

    Raises:
        DomainError: if max_length < 1
        EnumerationTooLargeError: if M**max_length exceeds the cap
    """
    if max_length < 1:
        raise DomainError(f"max_length must be >= 1 (got {max_length})")
    if cap is None:
        cap = get_runtime_config()["enumeration_cap"]
    count = matrix_set.M ** max_length
    if count > cap:
        raise EnumerationTooLargeError(
            f"Enumerating words up to length {max_length} over {matrix_set.M} matrices "
            f"needs {count} products, above the cap of {cap}.\n"
            f"Reduce max_length or raise the cap (--cap / JSRLAB_ENUM_CAP)."
        )

    started = time.perf_counter()
    arrays = matrix_set.arrays()
    beta = max(float(np.linalg.norm(a, 2)) for a in arrays)

    best = 0.0
    best_word: list[int] = [1]
    evaluated = 0
    pruned = 0

    def visit(product: np.ndarray, word: list[int]) -> None:
        nonlocal best, best_word, evaluated, pruned
        k = len(word)
        evaluated += 1
        value = spectral_radius(product) ** (1.0 / k)
        if value > best:
            best = value
            best_word = list(word)
        if k == max_length:
            return
        if prune:
            norm = float(np.linalg.norm(product, 2))
            reachable = max(
                (norm * beta ** j) ** (1.0 / (k + j)) for j in range(1, max_length - k + 1)
            )
            if reachable <= best:
                pruned += 1
                return
        for index in range(matrix_set.M):
            word.append(index + 1)
            visit(product @ arrays[index], word)
            word.pop()

    logger.info(f"Enumerating products of {matrix_set.M} matrices up to length {max_length}")
    for index in range(matrix_set.M):
        visit(arrays[index], [index + 1])

    elapsed = time.perf_counter() - started
    logger.info(f"Product lower bound {best:.6f} from {evaluated} words in {elapsed:.2f}s")
    return BoundReport(
        value=best,
        kind=BoundKind.LOWER,
        method="products",
        wall_time=elapsed,
        meta={
            "max_length": max_length,
            "word": best_word,
            "word_length": len(best_word),
            "words_evaluated": evaluated,
            "subtrees_pruned": pruned,
            "prune": prune,
        },
    )


# ============================================================================
# Ellipsoidal upper bound
# ============================================================================

def _objective(lower: np.ndarray, arrays: np.ndarray) -> tuple[float, int, np.ndarray]:
    """max_i σ_max(Lᵀ A_i L⁻ᵀ) with the active index and its subgradient in L."""
    inverse_t = np.linalg.inv(lower).T
    best_value = -1.0
    best_index = 0
    best_svd = None
    for i, a in enumerate(arrays):
        b = lower.T @ a @ inverse_t
        u, s, vt = np.linalg.svd(b)
        if s[0] > best_value:
            best_value = float(s[0])
            best_index = i
            best_svd = (u[:, 0], vt[0, :])
    u, v = best_svd
    # dσ = uᵀ dLᵀ (A L⁻ᵀ v) - σ vᵀ dLᵀ (L⁻ᵀ v)
    z = inverse_t @ v
    w = arrays[best_index] @ z
    gradient = np.outer(w, u) - best_value * np.outer(z, v)
    return best_value, best_index, np.tril(gradient)


def induced_norms(norm: EllipsoidalNorm, matrix_set: MatrixSet) -> list[float]:
    """‖A_i‖_P for every matrix of the set."""
    return [norm.induced_norm(a) for a in matrix_set.arrays()]


def ellipsoidal_upper_bound(
    matrix_set: MatrixSet,
    restarts: int = 10,
    iters: int = 3000,
    seed: int = 0,
    step: float = 0.05,
    final_step: float = 1e-6,
) -> tuple[BoundReport, EllipsoidalNorm]:
    """
    Certified upper bound max_i ‖A_i‖_P over quadratic norms ‖x‖_P = √(xᵀPx).

    Minimizes f(L) = max_i σ_max(Lᵀ A_i L⁻ᵀ) over lower-triangular L with
    positive diagonal by normalized subgradient steps with geometric decay
    from ``step`` to ``final_step``. Restart 0 starts from L = I; the others
    from random lower-triangular factors drawn from independent seeded
    generators. L is renormalized to unit Frobenius norm after each step
    (f is scale invariant) and its diagonal floored at 1e-8.

    Args:
        matrix_set: The set Σ
        restarts: Number of independent starts (>= 1)
        iters: Subgradient steps per start (>= 1)
        seed: Base seed; restart r uses default_rng([seed, r])

    Returns:
        (BoundReport of kind ``certified-upper``, the best EllipsoidalNorm)
    """
    if restarts < 1 or iters < 1:
        raise DomainError(f"restarts and iters must be >= 1 (got {restarts}, {iters})")

    started = time.perf_counter()
    arrays = matrix_set.arrays()
    n = matrix_set.n
    decay = (final_step / step) ** (1.0 / max(1, iters - 1))
    floor = 1e-8

    best_value = math.inf
    best_lower = np.eye(n)
    diverged = 0

    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        if restart == 0:
            lower = np.eye(n)
        else:
            lower = np.tril(rng.standard_normal((n, n)))
            lower[np.diag_indices(n)] = np.abs(np.diag(lower)) + 0.5
        lower /= np.linalg.norm(lower)

        run_best = math.inf
        run_lower = lower.copy()
        rate = step
        for _ in range(iters):
            value, _, gradient = _objective(lower, arrays)
            if not math.isfinite(value):
                break
            if value < run_best:
                run_best = value
                run_lower = lower.copy()
            grad_norm = np.linalg.norm(gradient)
            if grad_norm == 0.0:
                break
            lower = lower - rate * gradient / grad_norm
            diagonal = np.diag(lower)
            if np.any(diagonal < floor):
                lower[np.diag_indices(n)] = np.maximum(diagonal, floor)
            lower /= np.linalg.norm(lower)
            rate *= decay

        if not math.isfinite(run_best):
            diverged += 1
            logger.debug(f"Ellipsoid restart {restart} diverged")
            continue
        logger.debug(f"Ellipsoid restart {restart}: {run_best:.6f}")
        if run_best < best_value:
            best_value = run_best
            best_lower = run_lower

    meta = {"restarts": restarts, "iters": iters, "seed": seed, "diverged_restarts": diverged}
    if diverged == restarts:
        logger.warning("All ellipsoid restarts diverged; reporting the identity factor")
        meta["warning"] = "all restarts diverged"

    norm = EllipsoidalNorm(factor=np.tril(best_lower).tolist())
    value = max(induced_norms(norm, matrix_set))
    elapsed = time.perf_counter() - started
    logger.info(f"Ellipsoidal upper bound {value:.6f} after {restarts} restarts in {elapsed:.2f}s")
    return (
        BoundReport(
            value=value,
            kind=BoundKind.CERTIFIED_UPPER,
            method="ellipsoid",
            wall_time=elapsed,
            meta=meta,
        ),
        norm,
    )


def guarantee_interval(upper: float, tau: float) -> tuple[float, float]:
    """Interval [upper/τ, upper] guaranteed to contain ρ(Σ) for a τ-accurate method."""
    if tau < 1:
        raise DomainError(f"tau must be >= 1 (got {tau})")
    return upper / tau, upper


__all__ = [
    "lower_bound_products",
    "ellipsoidal_upper_bound",
    "induced_norms",
    "guarantee_interval",
]

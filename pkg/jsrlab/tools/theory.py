"""
Closed-form accuracy guarantees for JSR approximations.

All counts are exact Python integers. The Barvinok inequality

    (τ - √(τ²-1))^k + (τ + √(τ²-1))^k >= 6 · D(n,k)^{1/2}

is evaluated in 60-digit decimal arithmetic, switching to logarithms for
k > 200.
"""

import decimal
import logging
import math
from decimal import Decimal
from typing import Iterable, Optional

from jsrlab.errors import DomainError, SearchCeilingError
from jsrlab.schemas.bounds import NetworkStructureBound, VariablesRow

logger = logging.getLogger(__name__)

DEFAULT_K_CEILING = 10_000
_DIRECT_POWER_LIMIT = 200
_PRECISION = 60


def tau_quad(n: int) -> float:
    """Accuracy of the ellipsoidal approximation: √n."""
    if n < 1:
        raise DomainError(f"n must be >= 1 (got {n})")
    return math.sqrt(n)


def tau_sos(n: int, d: int) -> int:
    """SOS accuracy constant C(n+d-1, d)."""
    if n < 1 or d < 1:
        raise DomainError(f"n and d must be >= 1 (got n={n}, d={d})")
    return math.comb(n + d - 1, d)


def barvinok_D(n: int, k: int) -> int:
    """D(n,k) = Σ_{m=0}^{⌊k/2⌋} C(n+k-1-2m, k-2m)."""
    if n < 1 or k < 1:
        raise DomainError(f"n and k must be >= 1 (got n={n}, k={k})")
    return sum(math.comb(n + k - 1 - 2 * m, k - 2 * m) for m in range(k // 2 + 1))


def barvinok_inequality_holds(n: int, k: int, tau: float) -> bool:
    """Whether k satisfies the Barvinok vertex inequality for (n, τ)."""
    if tau <= 1:
        raise DomainError(f"tau must exceed 1 (got {tau})")
    bound = barvinok_D(n, k)
    with decimal.localcontext() as ctx:
        ctx.prec = _PRECISION
        t = Decimal(tau)
        root = (t * t - 1).sqrt()
        small, large = t - root, t + root
        rhs = 6 * Decimal(bound).sqrt()
        if k <= _DIRECT_POWER_LIMIT:
            return small ** k + large ** k >= rhs
        log_lhs = k * large.ln() + (1 + (small / large) ** k).ln()
        return log_lhs >= rhs.ln()


def barvinok_min_k(n: int, tau: float, ceiling: int = DEFAULT_K_CEILING) -> Optional[int]:
    """
    Smallest k >= 1 satisfying the Barvinok inequality, or None below ``ceiling``.

    Raises:
        DomainError: if tau <= 1
    """
    if tau <= 1:
        raise DomainError(
            f"tau must exceed 1 (got {tau}); the polytope approximation "
            f"theorem only applies to precisions above one"
        )
    for k in range(1, ceiling + 1):
        if barvinok_inequality_holds(n, k, tau):
            return k
    logger.warning(f"No Barvinok parameter found for n={n}, tau={tau} below k={ceiling}")
    return None


def mcmullen_faces(n: int, k: int) -> int:
    """
    Upper bound on the faces of an n-polytope with k vertices:
    C(k - ⌊(n+1)/2⌋, k-n) + C(k - ⌊(n+2)/2⌋, k-n).
    """
    if n < 1 or k <= n:
        raise DomainError(
            f"A full-dimensional polytope in dimension {n} needs at least {n + 1} vertices (got k={k})"
        )
    return math.comb(k - (n + 1) // 2, k - n) + math.comb(k - (n + 2) // 2, k - n)


def network_structure_bound(n: int, tau: float, ceiling: int = DEFAULT_K_CEILING) -> NetworkStructureBound:
    """
    Depth and width of a ReLU network whose CPWL output reaches precision τ.

    depth = ⌈log₂(n+1)⌉ + 1; the width is O(F^{2n²+3n+1}) with F the McMullen
    face bound at D_n^τ = 8·D(n, k_τ) vertices. The width itself is reported
    as log₁₀.

    Raises:
        SearchCeilingError: if no k_τ exists below ``ceiling``
    """
    k_tau = barvinok_min_k(n, tau, ceiling)
    if k_tau is None:
        raise SearchCeilingError(
            f"No Barvinok parameter satisfies the inequality for n={n}, tau={tau} below k={ceiling}.\n"
            f"Increase the ceiling or choose a larger tau."
        )
    vertex_budget = 8 * barvinok_D(n, k_tau)
    faces = mcmullen_faces(n, vertex_budget)
    exponent = 2 * n * n + 3 * n + 1
    return NetworkStructureBound(
        n=n,
        tau=tau,
        depth=math.ceil(math.log2(n + 1)) + 1,
        k_tau=k_tau,
        vertex_budget=vertex_budget,
        face_count=faces,
        width_exponent=exponent,
        log10_width=exponent * math.log10(faces),
    )


def sos_variable_count(n: int, d: int) -> int:
    """
    Gram-matrix parameter count N(N+1)/2 with N = C(n+d-1, d).

    This is an assumed formula for the SOS side of the comparison.
    """
    size = math.comb(n + d - 1, d)
    return size * (size + 1) // 2


def variables_comparison(
    n_range: Iterable[int],
    d: int,
    ceiling: int = DEFAULT_K_CEILING,
) -> list[VariablesRow]:
    """
    CPWL versus SOS variable counts at precision τ = τ_SOS(n, d).

    The CPWL count is vertices times dimension, 8·D(n, k_τ)·n.

    Raises:
        DomainError: if some n gives τ <= 1 (n = 1)
        SearchCeilingError: if some n has no k_τ below ``ceiling``
    """
    rows = []
    for n in n_range:
        tau = tau_sos(n, d)
        if tau <= 1:
            raise DomainError(f"tau_sos({n}, {d}) = {tau} leaves no room for a precision above one; use n >= 2")
        k_tau = barvinok_min_k(n, tau, ceiling)
        if k_tau is None:
            raise SearchCeilingError(f"No Barvinok parameter for n={n}, tau={tau} below k={ceiling}")
        rows.append(
            VariablesRow(
                n=n,
                d=d,
                tau=float(tau),
                k_tau=k_tau,
                cpwl_vars=8 * barvinok_D(n, k_tau) * n,
                sos_vars=sos_variable_count(n, d),
            )
        )
    return rows


__all__ = [
    "tau_quad",
    "tau_sos",
    "barvinok_D",
    "barvinok_inequality_holds",
    "barvinok_min_k",
    "mcmullen_faces",
    "network_structure_bound",
    "sos_variable_count",
    "variables_comparison",
]

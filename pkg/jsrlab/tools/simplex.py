"""
Dense two-phase primal simplex for standard-form LPs

    min cᵀx  subject to  A x = b,  x >= 0

with least-index (Bland) pivoting, so the method terminates without cycling.
Problem sizes here are small (n <= 8 rows, at most a few thousand columns),
so a dense tableau is sufficient.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from jsrlab.errors import InfeasibleLPError, NumericError, UnboundedLPError
from jsrlab.schemas.polytope import GaugeLPProblem, LPSolution

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9


class SimplexTableau:
    """
    Tableau [B⁻¹A | B⁻¹b ; reduced costs | -objective] with its basis.

    Row i of the tableau belongs to basic variable ``basis[i]``.
    """

    def __init__(
        self,
        a: np.ndarray,
        b: np.ndarray,
        costs: np.ndarray,
        basis: Sequence[int],
        tol: float = DEFAULT_TOL,
    ):
        m, n = a.shape
        self.table = np.zeros((m + 1, n + 1))
        self.table[:m, :n] = a
        self.table[:m, -1] = b
        self.table[-1, :n] = costs
        self.basis = list(basis)
        self.tol = tol
        self.iterations = 0
        self.price_out()

    @property
    def m(self) -> int:
        return self.table.shape[0] - 1

    @property
    def n(self) -> int:
        return self.table.shape[1] - 1

    def price_out(self) -> None:
        """Zero the reduced costs of the basic columns."""
        for row, col in enumerate(self.basis):
            coefficient = self.table[-1, col]
            if coefficient != 0.0:
                self.table[-1] -= coefficient * self.table[row]

    def pivot(self, row: int, col: int) -> None:
        t = self.table
        t[row] /= t[row, col]
        column = t[:, col].copy()
        column[row] = 0.0
        t -= np.outer(column, t[row])
        rhs = t[:-1, -1]
        rhs[(rhs < 0) & (rhs > -self.tol)] = 0.0
        self.basis[row] = col
        self.iterations += 1

    def bland_step(self, allowed: int) -> str:
        """One pivot over the first ``allowed`` columns: 'optimal', 'unbounded' or 'continue'."""
        candidates = np.flatnonzero(self.table[-1, :allowed] < -self.tol)
        if candidates.size == 0:
            return "optimal"
        col = int(candidates[0])
        column = self.table[:-1, col]
        rows = np.flatnonzero(column > self.tol)
        if rows.size == 0:
            return "unbounded"
        ratios = self.table[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
        row = min(ties, key=lambda r: self.basis[r])
        self.pivot(int(row), col)
        return "continue"

    def run(self, allowed: int, max_iter: int) -> str:
        while True:
            status = self.bland_step(allowed)
            if status != "continue":
                return status
            if self.iterations > max_iter:
                raise NumericError(
                    f"Simplex exceeded {max_iter} pivots on a {self.m}x{self.n} tableau; "
                    f"the problem is likely badly scaled."
                )

    def solution(self, size: int) -> np.ndarray:
        x = np.zeros(size)
        for row, col in enumerate(self.basis):
            if col < size:
                x[col] = self.table[row, -1]
        return x


def solve_standard_form(
    c: Sequence[float],
    a: Sequence[Sequence[float]],
    b: Sequence[float],
    tol: float = DEFAULT_TOL,
    max_iter: Optional[int] = None,
) -> LPSolution:
    """
    Solve min cᵀx s.t. Ax = b, x >= 0.

    Phase 1 minimizes the sum of artificial variables from the all-artificial
    basis; remaining artificials are pivoted out (or their rows dropped as
    redundant) before phase 2 optimizes cᵀx.

    Raises:
        InfeasibleLPError: if no x >= 0 satisfies Ax = b
        UnboundedLPError: if cᵀx is unbounded below
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float).copy()
    c = np.asarray(c, dtype=float)
    m, n = a.shape
    if b.shape != (m,) or c.shape != (n,):
        raise ValueError(f"Inconsistent LP shapes: A {a.shape}, b {b.shape}, c {c.shape}")
    if max_iter is None:
        max_iter = 50 * (m + n) + 100

    a = a.copy()
    negative = b < 0
    a[negative] *= -1.0
    b[negative] *= -1.0

    # Phase 1
    phase1 = SimplexTableau(
        np.hstack([a, np.eye(m)]),
        b,
        np.concatenate([np.zeros(n), np.ones(m)]),
        basis=range(n, n + m),
        tol=tol,
    )
    phase1.run(n + m, max_iter)
    infeasibility = -phase1.table[-1, -1]
    if infeasibility > tol * max(1.0, float(np.abs(b).max(initial=0.0))):
        raise InfeasibleLPError(
            f"LP is infeasible: phase 1 ended with artificial mass {infeasibility:.3e}."
        )

    redundant = []
    for row in range(m):
        if phase1.basis[row] >= n:
            candidates = np.flatnonzero(np.abs(phase1.table[row, :n]) > tol)
            if candidates.size:
                phase1.pivot(row, int(candidates[0]))
            else:
                redundant.append(row)
    keep = [row for row in range(m) if row not in redundant]
    if redundant:
        logger.debug(f"Dropping {len(redundant)} redundant equality rows")

    # Phase 2
    phase2 = SimplexTableau(
        phase1.table[keep, :n],
        phase1.table[keep, -1],
        c,
        basis=[phase1.basis[row] for row in keep],
        tol=tol,
    )
    phase2.iterations = phase1.iterations
    status = phase2.run(n, max_iter)
    if status == "unbounded":
        raise UnboundedLPError("LP objective is unbounded below on the feasible set.")

    x = phase2.solution(n)
    return LPSolution(
        objective=float(c @ x),
        x=x.tolist(),
        basis=list(phase2.basis),
        iterations=phase2.iterations,
        min_reduced_cost=float(phase2.table[-1, :n].min(initial=0.0)),
    )


def solve_lp(problem: GaugeLPProblem, tol: float = DEFAULT_TOL) -> LPSolution:
    """
    Gauge LP: min Σθ_j s.t. Σθ_j v_j = x, θ >= 0.

    Returns an LPSolution whose ``objective`` is λ and ``x`` is θ.
    """
    a = problem.constraint_matrix()
    return solve_standard_form(np.ones(a.shape[1]), a, problem.target, tol=tol)


__all__ = [
    "SimplexTableau",
    "solve_standard_form",
    "solve_lp",
]

"""Dense revised simplex for ``min c x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0``.

Two phases with artificial variables, Bland's smallest-index rule for both the
entering variable and ratio-test ties, and an explicit basis inverse kept up
to date by elementary row operations and refactorized periodically.  Problems
here are small and heavily degenerate, which is the regime Bland's rule is
for.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

FEAS_TOL = 1e-8
OPT_TOL = 1e-9
PIVOT_TOL = 1e-10
REFACTOR_EVERY = 64


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class BackendResult:
    status: Status
    x: Optional[np.ndarray]
    value: Optional[float]
    iterations: int
    message: str = ""


def _as_block(A, b, n):
    if A is None or len(A) == 0:
        return np.zeros((0, n)), np.zeros(0)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    if A.shape[1] != n or A.shape[0] != b.shape[0]:
        raise ValueError(f"constraint block of shape {A.shape} does not match "
                         f"{n} variables and {b.shape[0]} right-hand sides")
    return A, b


class RevisedSimplex:
    """Single-use solver instance; call :meth:`solve` once."""

    def __init__(self, c, A_eq=None, b_eq=None, A_ub=None, b_ub=None,
                 max_iter: Optional[int] = None):
        c = np.asarray(c, dtype=float).ravel()
        n = c.shape[0]
        A_eq, b_eq = _as_block(A_eq, b_eq, n)
        A_ub, b_ub = _as_block(A_ub, b_ub, n)
        for arr in (c, A_eq, b_eq, A_ub, b_ub):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP coefficients must be finite")
        m_eq, m_ub = A_eq.shape[0], A_ub.shape[0]
        m = m_eq + m_ub
        self.n = n
        self.m = m
        # Columns: original x, then one slack per <= row, then artificials.
        A = np.zeros((m, n + m_ub))
        A[:m_eq, :n] = A_eq
        A[m_eq:, :n] = A_ub
        A[m_eq:, n:] = np.eye(m_ub)
        b = np.concatenate([b_eq, b_ub])
        flip = b < 0
        A[flip] *= -1
        b[flip] *= -1
        # Starting basis, indexed by row: the slack of each unflipped <= row,
        # an artificial everywhere else.
        n_struct = n + m_ub
        by_row = [0] * m
        art_rows = []
        for r in range(m):
            if r >= m_eq and not flip[r]:
                by_row[r] = n + r - m_eq
            else:
                by_row[r] = n_struct + len(art_rows)
                art_rows.append(r)
        art = np.zeros((m, len(art_rows)))
        for j, r in enumerate(art_rows):
            art[r, j] = 1.0
        self.A = np.hstack([A, art])
        self.b = b
        self.c = np.concatenate([c, np.zeros(m_ub + len(art_rows))])
        self.n_struct = n_struct
        self.n_total = self.A.shape[1]
        self.basis = np.array(by_row, dtype=int)
        self.Binv = np.eye(m)
        self.max_iter = max_iter if max_iter is not None else 50 * (m + self.n_total)
        self.iterations = 0
        self._used = False

    # -- linear algebra ---------------------------------------------------
    def _refactor(self) -> bool:
        try:
            self.Binv = np.linalg.inv(self.A[:, self.basis])
        except np.linalg.LinAlgError:
            return False
        return bool(np.all(np.isfinite(self.Binv)))

    def _basic_values(self) -> np.ndarray:
        return self.Binv @ self.b

    def _pivot(self, row: int, col: int, u: np.ndarray) -> None:
        pivot_row = self.Binv[row] / u[row]
        self.Binv -= np.outer(u, pivot_row)
        self.Binv[row] = pivot_row
        self.basis[row] = col
        self.iterations += 1
        if self.iterations % REFACTOR_EVERY == 0:
            self._refactor()

    # -- main loop ----------------------------------------------------------
    def _run(self, cost: np.ndarray, allowed: np.ndarray) -> Status:
        while True:
            if self.iterations >= self.max_iter:
                return Status.NUMERICAL_FAILURE
            xb = self._basic_values()
            y = cost[self.basis] @ self.Binv
            reduced = cost - y @ self.A
            candidates = allowed.copy()
            candidates[self.basis] = False
            entering = np.flatnonzero(candidates & (reduced < -OPT_TOL))
            if entering.size == 0:
                return Status.OPTIMAL
            col = int(entering[0])
            u = self.Binv @ self.A[:, col]
            rows = np.flatnonzero(u > PIVOT_TOL)
            if rows.size == 0:
                return Status.UNBOUNDED
            ratios = np.maximum(xb[rows], 0.0) / u[rows]
            best = ratios.min()
            ties = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
            row = int(ties[np.argmin(self.basis[ties])])
            self._pivot(row, col, u)

    def _drive_out_artificials(self) -> None:
        for row in range(self.m):
            if self.basis[row] < self.n_struct:
                continue
            alpha = self.Binv[row] @ self.A[:, :self.n_struct]
            alpha[self.basis[self.basis < self.n_struct]] = 0.0
            j = int(np.argmax(np.abs(alpha))) if alpha.size else 0
            if alpha.size and abs(alpha[j]) > PIVOT_TOL:
                u = self.Binv @ self.A[:, j]
                self._pivot(row, j, u)
            # else: redundant row; the artificial stays basic at level zero

    def _residual_ok(self, x: np.ndarray) -> bool:
        full = np.zeros(self.n_total)
        full[self.basis] = self._basic_values()
        scale = max(1.0, float(np.abs(self.b).max(initial=0.0)))
        resid = self.A[:, :self.n_struct] @ full[:self.n_struct] - self.b
        return bool(np.all(np.abs(resid) <= FEAS_TOL * scale)
                    and np.all(full[:self.n_struct] >= -FEAS_TOL))

    def solve(self) -> BackendResult:
        if self._used:
            raise RuntimeError("RevisedSimplex instances are single-use")
        self._used = True
        if self.m == 0:
            if np.any(self.c[:self.n] < -OPT_TOL):
                return BackendResult(Status.UNBOUNDED, None, None, 0, "no constraints")
            return BackendResult(Status.OPTIMAL, np.zeros(self.n), 0.0, 0)

        phase1 = np.zeros(self.n_total)
        phase1[self.n_struct:] = 1.0
        everything = np.ones(self.n_total, dtype=bool)
        status = self._run(phase1, everything)
        if status is not Status.OPTIMAL:
            return BackendResult(Status.NUMERICAL_FAILURE, None, None, self.iterations,
                                 f"phase one ended with status {status.value}")
        self._refactor()
        xb = self._basic_values()
        infeasibility = float(phase1[self.basis] @ xb)
        scale = max(1.0, float(np.abs(self.b).max(initial=0.0)))
        if infeasibility > FEAS_TOL * scale:
            return BackendResult(Status.INFEASIBLE, None, None, self.iterations,
                                 f"phase one residual {infeasibility:.3e}")
        self._drive_out_artificials()

        structural = np.zeros(self.n_total, dtype=bool)
        structural[:self.n_struct] = True
        status = self._run(self.c, structural)
        if status is Status.UNBOUNDED:
            return BackendResult(Status.UNBOUNDED, None, None, self.iterations)
        if status is not Status.OPTIMAL:
            return BackendResult(Status.NUMERICAL_FAILURE, None, None, self.iterations,
                                 "iteration cap reached")
        if not self._refactor():
            return BackendResult(Status.NUMERICAL_FAILURE, None, None, self.iterations,
                                 "singular final basis")
        full = np.zeros(self.n_total)
        full[self.basis] = self._basic_values()
        x = full[:self.n]
        if not self._residual_ok(x):
            return BackendResult(Status.NUMERICAL_FAILURE, None, None, self.iterations,
                                 "final point violates constraints")
        x = np.where(np.abs(x) <= PIVOT_TOL, 0.0, x)
        return BackendResult(Status.OPTIMAL, x, float(self.c[:self.n] @ x), self.iterations)


def solve_standard_form(c, A_eq=None, b_eq=None, A_ub=None, b_ub=None,
                        max_iter: Optional[int] = None) -> BackendResult:
    """Solve ``min c x`` over ``x >= 0`` with equality and ``<=`` rows."""
    return RevisedSimplex(c, A_eq, b_eq, A_ub, b_ub, max_iter=max_iter).solve()

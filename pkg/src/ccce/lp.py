"""Dense revised simplex with primal-dual certificates.

Problems are posed as::

    minimize    c @ z
    subject to  A_ub @ z <= b_ub
                A_eq @ z == b_eq
                z >= 0            (or z free when ``nonneg=False``)

Dual sign convention
--------------------
``ineq_duals`` are the multipliers ``lam >= 0`` of the Lagrangian
``c @ z + lam @ (A_ub @ z - b_ub) + mu @ (A_eq @ z - b_eq)`` with ``mu = -eq_duals``,
so that at a nondegenerate optimum::

    d J* / d b_ub[r] = -ineq_duals[r]
    d J* / d b_eq[r] = +eq_duals[r]

Raising the right-hand side of a binding ``<=`` row loosens it, which can only
lower the minimum, hence the minus sign. This is the only place where the
convention is fixed; callers that price a tightening margin ``m(z) + b <= 0``
(right-hand side ``-b``) read ``d J*/d b = +lam`` directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import linalg

PRIMAL_TOL = 1e-8
NONNEG_TOL = 1e-9
DUAL_TOL = 1e-8
SLACKNESS_TOL = 1e-7
GAP_TOL = 1e-8
DEGENERACY_TOL = 1e-9

_PRICING_TOL = 1e-10
_PIVOT_TOL = 1e-9
_PHASE1_TOL = 1e-9
_STALL_LIMIT = 20
_PERTURBATION = 1e-7
_GOLDEN = 0.6180339887498949


class LpInputError(ValueError):
    """Malformed linear program (shape mismatch, non-finite data)."""


class LpNumericalError(RuntimeError):
    """The simplex iteration did not terminate or hit a singular basis."""


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    objective: np.ndarray
    ineq_matrix: np.ndarray | None = None
    ineq_rhs: np.ndarray | None = None
    eq_matrix: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None
    nonneg: bool = True

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise LpInputError("objective must be a non-empty vector")
        n = c.size
        object.__setattr__(self, "objective", c)
        for mat_name, rhs_name in (("ineq_matrix", "ineq_rhs"), ("eq_matrix", "eq_rhs")):
            a, b = getattr(self, mat_name), getattr(self, rhs_name)
            if a is None and b is None:
                a, b = np.zeros((0, n)), np.zeros(0)
            elif a is None or b is None:
                raise LpInputError(f"{mat_name} and {rhs_name} must be given together")
            a = np.atleast_2d(np.asarray(a, dtype=float))
            b = np.atleast_1d(np.asarray(b, dtype=float))
            if a.size == 0:
                a = a.reshape(0, n)
            if a.shape[1] != n:
                raise LpInputError(f"{mat_name} has {a.shape[1]} columns, expected {n}")
            if b.shape != (a.shape[0],):
                raise LpInputError(f"{rhs_name} has shape {b.shape}, expected ({a.shape[0]},)")
            if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
                raise LpInputError(f"{mat_name}/{rhs_name} contain non-finite entries")
            object.__setattr__(self, mat_name, a)
            object.__setattr__(self, rhs_name, b)
        if not np.all(np.isfinite(c)):
            raise LpInputError("objective contains non-finite entries")

    @property
    def num_vars(self) -> int:
        return self.objective.size


@dataclass(frozen=True)
class LpSolution:
    status: Status
    primal: np.ndarray
    objective_value: float
    ineq_duals: np.ndarray
    eq_duals: np.ndarray
    degenerate: bool = False
    iterations: int = 0
    reduced_costs: np.ndarray = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def ineq_slack(lp: LinearProgram, z: np.ndarray) -> np.ndarray:
    return lp.ineq_rhs - lp.ineq_matrix @ z


def dual_objective(lp: LinearProgram, sol: LpSolution) -> float:
    return float(lp.eq_rhs @ sol.eq_duals - lp.ineq_rhs @ sol.ineq_duals)


def certificate_violations(lp: LinearProgram, sol: LpSolution) -> dict[str, float]:
    """Worst violation of each optimality certificate (0 means satisfied).

    Keys: ``primal``, ``nonneg``, ``dual``, ``slackness``, ``gap``; each value
    is the amount by which the stated tolerance is exceeded, clipped at zero.
    """
    z = sol.primal
    out = {}
    ub_viol = np.max(-ineq_slack(lp, z), initial=0.0)
    eq_viol = np.max(np.abs(lp.eq_matrix @ z - lp.eq_rhs), initial=0.0)
    out["primal"] = max(0.0, max(ub_viol, eq_viol) - PRIMAL_TOL)
    out["nonneg"] = max(0.0, -np.min(z) - NONNEG_TOL) if lp.nonneg else 0.0
    lam = sol.ineq_duals
    red = lp.objective + lp.ineq_matrix.T @ lam - lp.eq_matrix.T @ sol.eq_duals
    dual_viol = -np.min(red, initial=0.0) if lp.nonneg else np.max(np.abs(red), initial=0.0)
    out["dual"] = max(0.0, dual_viol - DUAL_TOL, -np.min(lam, initial=0.0) - DUAL_TOL)
    cs = lam * ineq_slack(lp, z)
    out["slackness"] = max(0.0, np.max(np.abs(cs), initial=0.0) - SLACKNESS_TOL)
    gap = abs(sol.objective_value - dual_objective(lp, sol))
    out["gap"] = max(0.0, gap - GAP_TOL * (1.0 + abs(sol.objective_value)))
    return out


def _simplex(A, b, c, basis, allowed, max_iter, stall_limit=_STALL_LIMIT):
    """Primal revised simplex on ``min c@x, A@x = b, x >= 0`` from a feasible basis.

    Dantzig pricing; Bland's rule while a run of ``stall_limit`` zero-step
    pivots is in progress and unconditionally after ``3 * (rows + cols)``
    iterations. Returns ``(status, basis, iterations)``; ``basis`` is modified
    in place.
    """
    m, ncols = A.shape
    bland_after = 3 * (m + ncols)
    stalled = 0
    for it in range(max_iter):
        B = A[:, basis]
        try:
            lu = linalg.lu_factor(B, check_finite=False)
        except (linalg.LinAlgError, ValueError) as exc:
            raise LpNumericalError(f"singular basis at iteration {it}") from exc
        if not np.all(np.isfinite(lu[0])) or np.min(np.abs(np.diag(lu[0]))) < 1e-14:
            raise LpNumericalError(f"singular basis at iteration {it}")
        x_b = linalg.lu_solve(lu, b, check_finite=False)
        y = linalg.lu_solve(lu, c[basis], trans=1, check_finite=False)
        d = c - A.T @ y
        d[basis] = 0.0
        d[~allowed] = 0.0
        candidates = np.flatnonzero(d < -_PRICING_TOL)
        if candidates.size == 0:
            return Status.OPTIMAL, basis, it
        bland = it >= bland_after or stalled >= stall_limit
        if bland:
            entering = candidates[0]
        else:
            entering = candidates[np.argmin(d[candidates])]
        u = linalg.lu_solve(lu, A[:, entering], check_finite=False)
        rows = np.flatnonzero(u > _PIVOT_TOL)
        if rows.size == 0:
            return Status.UNBOUNDED, basis, it
        ratios = np.maximum(x_b[rows], 0.0) / u[rows]
        best = np.min(ratios)
        tied = rows[ratios <= best + 1e-12 * (1.0 + best)]
        if bland:
            leave = tied[np.argmin(basis[tied])]
        else:
            leave = tied[np.argmax(u[tied])]
        stalled = stalled + 1 if best <= 1e-12 else 0
        basis[leave] = entering
    raise LpNumericalError(f"simplex iteration limit ({max_iter}) exceeded")


def _dual_simplex(A, b, c, basis, allowed, max_iter):
    """Dual simplex from a dual-feasible basis; used to undo the rhs perturbation."""
    m = A.shape[0]
    tol = 1e-10 * (1.0 + np.max(np.abs(b), initial=0.0))
    for it in range(max_iter):
        lu = linalg.lu_factor(A[:, basis], check_finite=False)
        if not np.all(np.isfinite(lu[0])) or np.min(np.abs(np.diag(lu[0]))) < 1e-14:
            raise LpNumericalError(f"singular basis in dual simplex at iteration {it}")
        x_b = linalg.lu_solve(lu, b, check_finite=False)
        r = int(np.argmin(x_b))
        if x_b[r] >= -tol:
            return Status.OPTIMAL, basis, it
        rho = linalg.lu_solve(lu, np.eye(m)[r], trans=1, check_finite=False)
        alpha = rho @ A
        y = linalg.lu_solve(lu, c[basis], trans=1, check_finite=False)
        d = np.maximum(c - A.T @ y, 0.0)
        mask = allowed & (alpha < -_PIVOT_TOL)
        mask[basis] = False
        cand = np.flatnonzero(mask)
        if cand.size == 0:
            return Status.INFEASIBLE, basis, it
        ratios = d[cand] / -alpha[cand]
        basis[r] = cand[int(np.argmin(ratios))]
    raise LpNumericalError(f"dual simplex iteration limit ({max_iter}) exceeded")


def _perturbed_simplex(A, b, c, basis, allowed, max_iter):
    """Primal simplex on a perturbed rhs followed by dual-simplex cleanup.

    Every basic value of the feasible start is raised by a small distinct
    amount, which keeps the start feasible and makes degenerate vertices
    unlikely. Dual simplex pivots then restore the true ``b``; if that fails
    the unperturbed problem is solved from the original start.
    """
    m = A.shape[0]
    start = basis.copy()
    scale = _PERTURBATION * (1.0 + np.max(np.abs(b), initial=0.0))
    shift = scale * (1.0 + np.modf(np.arange(1, m + 1) * _GOLDEN)[0])
    status, basis, it = _simplex(A, b + A[:, basis] @ shift, c, basis, allowed, max_iter)
    if status is Status.UNBOUNDED:
        return status, basis, it
    try:
        status, basis, it2 = _dual_simplex(A, b, c, basis, allowed, max_iter)
        it += it2
    except LpNumericalError:
        status = None
    if status is Status.OPTIMAL:
        return status, basis, it
    status, basis, it2 = _simplex(A, b, c, start, allowed, max_iter)
    return status, basis, it + it2


def solve(lp: LinearProgram, max_iter: int | None = None) -> LpSolution:
    """Solve ``lp`` to optimality, or report infeasible / unbounded.

    Raises
    ------
    LpInputError
        If ``lp`` is not a :class:`LinearProgram`.
    LpNumericalError
        If the iteration limit is hit or the basis turns singular.
    """
    if not isinstance(lp, LinearProgram):
        raise LpInputError("expected a LinearProgram")
    n = lp.num_vars
    m_ub, m_eq = lp.ineq_rhs.size, lp.eq_rhs.size
    m = m_ub + m_eq

    # structural columns (free variables split into z+ and z-)
    if lp.nonneg:
        struct_ub, struct_eq, c_struct = lp.ineq_matrix, lp.eq_matrix, lp.objective
    else:
        struct_ub = np.hstack([lp.ineq_matrix, -lp.ineq_matrix])
        struct_eq = np.hstack([lp.eq_matrix, -lp.eq_matrix])
        c_struct = np.concatenate([lp.objective, -lp.objective])
    ns = c_struct.size

    # standard form rows: [ub rows with slacks; eq rows], made rhs >= 0
    A = np.zeros((m, ns + m_ub))
    A[:m_ub, :ns] = struct_ub
    A[:m_ub, ns:] = np.eye(m_ub)
    A[m_ub:, :ns] = struct_eq
    b = np.concatenate([lp.ineq_rhs, lp.eq_rhs])
    sign = np.where(b < 0, -1.0, 1.0)
    A *= sign[:, None]
    b = b * sign

    # artificials only where the slack cannot start basic
    need_art = np.ones(m, dtype=bool)
    need_art[:m_ub] = sign[:m_ub] < 0
    art_rows = np.flatnonzero(need_art)
    n_real = ns + m_ub
    A = np.hstack([A, np.zeros((m, art_rows.size))])
    A[art_rows, n_real + np.arange(art_rows.size)] = 1.0
    ncols = A.shape[1]
    basis = np.empty(m, dtype=int)
    basis[:m_ub] = ns + np.arange(m_ub)
    basis[art_rows] = n_real + np.arange(art_rows.size)

    if max_iter is None:
        max_iter = 50 * (m + ncols) + 1000
    iterations = 0

    if art_rows.size:
        c1 = np.zeros(ncols)
        c1[n_real:] = 1.0
        allowed = np.ones(ncols, dtype=bool)
        status, basis, it = _perturbed_simplex(A, b, c1, basis, allowed, max_iter)
        iterations += it
        x_b = np.linalg.solve(A[:, basis], b)
        infeas = float(c1[basis] @ x_b)
        if infeas > _PHASE1_TOL * (1.0 + np.max(np.abs(b), initial=0.0)):
            return _empty(lp, Status.INFEASIBLE, iterations)
        _drive_out_artificials(A, basis, n_real)

    c2 = np.zeros(ncols)
    c2[:ns] = c_struct
    allowed = np.zeros(ncols, dtype=bool)
    allowed[:n_real] = True
    status, basis, it = _perturbed_simplex(A, b, c2, basis, allowed, max_iter)
    iterations += it
    if status is Status.UNBOUNDED:
        return _empty(lp, Status.UNBOUNDED, iterations)

    B = A[:, basis]
    x_b = np.linalg.solve(B, b)
    y = np.linalg.solve(B.T, c2[basis])
    degenerate = bool(np.any(np.abs(x_b) <= DEGENERACY_TOL))
    x = np.zeros(ncols)
    x[basis] = np.maximum(x_b, 0.0)
    z = x[:n] - x[n:ns] if not lp.nonneg else x[:n]
    # undo the row flips; ub rows are priced as lam = -y
    y = y * sign
    # basic slacks price at zero; drop the solve's roundoff so ties stay exact
    y[np.abs(y) <= 1e-12 * (1.0 + np.max(np.abs(c2), initial=0.0))] = 0.0
    ineq_duals = np.maximum(-y[:m_ub], 0.0)
    eq_duals = y[m_ub:]
    reduced = lp.objective + lp.ineq_matrix.T @ ineq_duals - lp.eq_matrix.T @ eq_duals
    return LpSolution(
        status=Status.OPTIMAL,
        primal=z,
        objective_value=float(lp.objective @ z),
        ineq_duals=ineq_duals,
        eq_duals=eq_duals,
        degenerate=degenerate,
        iterations=iterations,
        reduced_costs=reduced,
    )


def _drive_out_artificials(A, basis, n_real):
    # pivot zero-level artificials out where a real column has a nonzero entry
    # in their row; rows with none are redundant and keep the artificial at 0
    for pos in np.flatnonzero(basis >= n_real):
        B = A[:, basis]
        row = np.linalg.solve(B.T, np.eye(len(basis))[pos])
        entries = row @ A[:, :n_real]
        entries[basis[basis < n_real]] = 0.0
        j = int(np.argmax(np.abs(entries)))
        if abs(entries[j]) > 1e-7:
            basis[pos] = j


def _empty(lp: LinearProgram, status: Status, iterations: int) -> LpSolution:
    nan = np.full(lp.num_vars, np.nan)
    return LpSolution(
        status=status,
        primal=nan,
        objective_value=float("nan") if status is Status.INFEASIBLE else -float("inf"),
        ineq_duals=np.full(lp.ineq_rhs.size, np.nan),
        eq_duals=np.full(lp.eq_rhs.size, np.nan),
        iterations=iterations,
    )

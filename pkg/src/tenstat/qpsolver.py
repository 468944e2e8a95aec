"""Dense strictly convex QP solver with KKT verification.

Solves  min q^T R q  s.t.  A_eq q = b_eq,  S q <= v  by a primal active-set
method: equality constraints are eliminated through a nullspace basis, and
the inequality-constrained reduced problem is solved by working-set
iteration. Problems here are small and dense (a few dozen variables), so
exactness and warm-startability matter more than scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import lsq_linear


class SolveStatus(Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    ITER_LIMIT = "IterLimit"


@dataclass(frozen=True)
class QpConfig:
    feas_tol: float = 1e-8
    opt_tol: float = 1e-8
    max_iter: int = 200


@dataclass(frozen=True)
class QpProblem:
    """min q^T R q s.t. A_eq q = b_eq and S q <= v; R diagonal (or dense) PD."""

    R: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    S: np.ndarray
    v: np.ndarray
    config: QpConfig = field(default_factory=QpConfig)

    def __post_init__(self):
        s = self.R.shape[0]
        if self.R.shape != (s, s):
            raise ValueError("R must be square")
        if self.A_eq.shape[1] != s or self.A_eq.shape[0] != self.b_eq.size:
            raise ValueError("equality constraint dimensions do not match")
        if self.S.shape[1] != s or self.S.shape[0] != self.v.size:
            raise ValueError("inequality constraint dimensions do not match")
        if np.any(np.diag(self.R) <= 0):
            raise ValueError("R must be positive definite")

    @property
    def num_vars(self) -> int:
        return self.R.shape[0]

    @property
    def scale(self) -> float:
        parts = [1.0]
        if self.b_eq.size:
            parts.append(float(np.max(np.abs(self.b_eq))))
        if self.v.size:
            parts.append(float(np.max(np.abs(self.v))))
        return max(parts)


@dataclass(frozen=True)
class KktResiduals:
    """Scaled first-order optimality residuals at a point."""

    stationarity: float
    primal_eq: float
    primal_ineq: float
    complementarity: float
    eq_multipliers: np.ndarray
    ineq_multipliers: np.ndarray

    @property
    def worst(self) -> float:
        return max(
            self.stationarity, self.primal_eq, self.primal_ineq, self.complementarity
        )


@dataclass(frozen=True)
class QpSolution:
    q: np.ndarray
    status: SolveStatus
    objective: float
    kkt: KktResiduals
    active_set: tuple[int, ...]
    iterations: int
    message: str = ""


def kkt_residuals(problem: QpProblem, q: np.ndarray) -> KktResiduals:
    """Residuals of the KKT conditions at q, multipliers fit by least squares.

    Multipliers (lambda free, mu >= 0) are fit to the stationarity equation
    2 R q + A_eq^T lambda + S^T mu = 0 over the near-active inequality rows.
    All four residuals are scaled by max(1, |b_eq|, |v|).
    """
    q = np.asarray(q, dtype=float)
    scale = problem.scale
    grad = (problem.R + problem.R.T) @ q
    me = problem.A_eq.shape[0]
    slack = problem.S @ q - problem.v
    atol = 1e-7 * scale
    active = np.flatnonzero(slack >= -atol)

    blocks = []
    if me:
        blocks.append(problem.A_eq.T)
    if active.size:
        blocks.append(problem.S[active].T)
    mu = np.zeros(problem.v.size)
    lam = np.zeros(me)
    if blocks:
        M = np.hstack(blocks)
        x, *_ = np.linalg.lstsq(M, -grad, rcond=None)
        if active.size and np.min(x[me:]) < -1e-9 * scale:
            # plain fit violates mu >= 0 materially; redo with the sign bound
            lb = np.concatenate([np.full(me, -np.inf), np.zeros(active.size)])
            ub = np.full(me + active.size, np.inf)
            x = lsq_linear(M, -grad, bounds=(lb, ub)).x
        x[me:] = np.maximum(x[me:], 0.0)
        lam = x[:me]
        mu[active] = x[me:]
        stat = float(np.max(np.abs(grad + M @ x)))
    else:
        stat = float(np.max(np.abs(grad))) if grad.size else 0.0

    primal_eq = (
        float(np.max(np.abs(problem.A_eq @ q - problem.b_eq))) if me else 0.0
    )
    primal_ineq = float(max(0.0, np.max(slack))) if slack.size else 0.0
    comp = float(np.max(np.abs(mu * slack))) if slack.size else 0.0
    return KktResiduals(
        stationarity=stat / scale,
        primal_eq=primal_eq / scale,
        primal_ineq=primal_ineq / scale,
        complementarity=comp / scale,
        eq_multipliers=lam,
        ineq_multipliers=mu,
    )


def _nullspace(M: np.ndarray) -> np.ndarray:
    """Orthonormal nullspace basis via rank-revealing (pivoted) QR of M^T."""
    if M.size == 0:
        return np.eye(M.shape[1])
    Q, R, _ = scipy.linalg.qr(M.T, mode="full", pivoting=True)
    diag = np.abs(np.diag(R)) if min(R.shape) else np.zeros(0)
    tol = (diag.max() if diag.size else 0.0) * max(M.shape) * 1e-13
    rank = int(np.sum(diag > tol))
    return Q[:, rank:]


class _IterLimit(Exception):
    def __init__(self, z, working, used):
        self.z, self.working, self.used = z, working, used


def _active_set_core(H, g, S, v, z0, working0, max_iter, atol):
    """Primal active-set loop for min 1/2 z^T H z + g^T z s.t. S z <= v.

    z0 must be feasible to within atol; returns (z, working set, iterations).
    """
    z = np.asarray(z0, dtype=float).copy()
    m = v.size
    working = sorted(working0)
    row_norms = np.linalg.norm(S, axis=1) if m else np.zeros(0)
    zero_steps = 0

    for it in range(1, max_iter + 1):
        grad = H @ z + g
        if working:
            N = _nullspace(S[working])
        else:
            N = np.eye(z.size)
        if N.shape[1] == 0:
            p = np.zeros_like(z)
        else:
            reduced = N.T @ H @ N
            p = N @ np.linalg.solve(reduced, -(N.T @ grad))

        if np.max(np.abs(p), initial=0.0) <= 1e-10 * (1.0 + np.max(np.abs(z), initial=0.0)):
            if not working:
                return z, working, it
            mults, *_ = np.linalg.lstsq(S[working].T, -grad, rcond=None)
            worst = np.argmin(mults)
            if mults[worst] >= -atol:
                return z, working, it
            if zero_steps > 2:  # Bland-style tie break to avoid cycling
                drop = min(i for i, mu in zip(working, mults) if mu < -atol)
            else:
                drop = working[worst]
            working.remove(drop)
            zero_steps += 1
            continue

        alpha = 1.0
        blocking = -1
        slack = v - S @ z if m else np.zeros(0)
        sp = S @ p if m else np.zeros(0)
        for i in range(m):
            if i in working:
                continue
            if sp[i] > 1e-13 * max(1.0, row_norms[i]) * max(1.0, np.abs(p).max()):
                ai = max(slack[i], 0.0) / sp[i]
                if ai < alpha:
                    alpha, blocking = ai, i
        z = z + alpha * p
        zero_steps = zero_steps + 1 if alpha <= 1e-14 else 0
        if blocking >= 0 and alpha < 1.0:
            working = sorted(working + [blocking])

    raise _IterLimit(z, working, max_iter)


def _repair_small_violations(Sz, vz, z0, atol, rounds: int = 6):
    """Try to fix small constraint violations by min-norm corrections.

    Projects onto the violated rows' boundary repeatedly (cheap compared to
    a full feasibility solve; typical after warm starting from a nearby
    pose). Returns the repaired point, feasible or not.
    """
    z = z0.copy()
    for _ in range(rounds):
        viol = Sz @ z - vz
        bad = np.flatnonzero(viol > 0.25 * atol)
        if bad.size == 0:
            break
        step, *_ = np.linalg.lstsq(Sz[bad], viol[bad], rcond=None)
        z = z - step
    return z


def _box_bounds(S, v):
    """If every S row has a single nonzero, return per-variable (lo, hi)."""
    n = S.shape[1]
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    for row, rhs in zip(S, v):
        nz = np.flatnonzero(row)
        if nz.size != 1:
            return None
        j = nz[0]
        if row[j] > 0:
            hi[j] = min(hi[j], rhs / row[j])
        else:
            lo[j] = max(lo[j], rhs / row[j])
    return lo, hi


def _phase1_feasible_point(problem, q_p, Z, Sz, vz, z0, scale):
    """Find a feasible z for Sz z <= vz, or None if proven empty.

    Box-structured inequalities (the production case) first try a bounded
    least-squares solve in the original variables; the result is verified
    in the reduced coordinates (an ill-conditioned equality block can spoil
    the mapping), falling back to an active-set run on a slack-augmented
    problem.
    """
    feas_tol = problem.config.feas_tol * scale

    def verified(z):
        if z is None:
            return None
        z = _repair_small_violations(Sz, vz, z, feas_tol)
        return z if np.max(Sz @ z - vz, initial=0.0) <= 0.5 * feas_tol else None

    box = _box_bounds(problem.S, problem.v)
    if box is not None:
        lo, hi = box
        if np.any(lo > hi + feas_tol):
            return None
        if problem.A_eq.shape[0] == 0:
            candidate = verified(Z.T @ (np.clip(np.zeros(problem.num_vars), lo, hi) - q_p))
        else:
            res = lsq_linear(problem.A_eq, problem.b_eq, bounds=(lo, hi), tol=1e-12)
            candidate = verified(Z.T @ (res.x - q_p))
        if candidate is not None:
            return candidate

    # Slack-augmented run: minimize t^2 (+ small regularizer) subject to
    # S z - t <= v and t >= 0, re-anchoring the regularizer a few times.
    z = z0.copy()
    eps = 1e-8
    nz = z.size
    H = np.zeros((nz + 1, nz + 1))
    H[:nz, :nz] = 2 * eps * np.eye(nz)
    H[nz, nz] = 2.0
    S_aug = np.hstack([np.vstack([Sz, np.zeros((1, nz))]), -np.ones((vz.size + 1, 1))])
    v_aug = np.concatenate([vz, [0.0]])
    for _ in range(4):
        t0 = max(0.0, float(np.max(Sz @ z - vz, initial=0.0))) + 1.0
        y0 = np.concatenate([z, [t0]])
        g = np.concatenate([-2 * eps * z, [0.0]])
        try:
            y, _, _ = _active_set_core(
                H, g, S_aug, v_aug, y0, [], problem.config.max_iter, feas_tol
            )
        except _IterLimit as e:
            y = e.z
        z, t = y[:nz], y[nz]
        if t <= max(feas_tol, 1e-10 * (1 + np.abs(z).max(initial=0.0))):
            return verified(z)
    return None


def solve(
    problem: QpProblem,
    warm_start: Optional[np.ndarray] = None,
) -> QpSolution:
    """Solve the QP; status Optimal, Infeasible, or IterLimit.

    The minimizer is unique (R is PD). warm_start seeds the feasible-point
    search and the initial working set, which pays off across the slowly
    varying poses of a trajectory.
    """
    cfg = problem.config
    scale = problem.scale
    feas_tol = cfg.feas_tol * scale
    G = problem.R + problem.R.T
    me = problem.A_eq.shape[0]
    s = problem.num_vars

    def finish(q, status, active, iters, message=""):
        return QpSolution(
            q=q,
            status=status,
            objective=float(q @ problem.R @ q),
            kkt=kkt_residuals(problem, q),
            active_set=tuple(int(i) for i in active),
            iterations=iters,
            message=message,
        )

    # Eliminate equalities: q = q_p + Z z with Z an orthonormal nullspace basis.
    if me:
        U, sig, Vt = np.linalg.svd(problem.A_eq, full_matrices=True)
        tol = (sig[0] if sig.size else 0.0) * max(problem.A_eq.shape) * 1e-13
        rank = int(np.sum(sig > tol))
        q_p = Vt[:rank].T @ ((U[:, :rank].T @ problem.b_eq) / sig[:rank])
        if np.max(np.abs(problem.A_eq @ q_p - problem.b_eq)) > feas_tol:
            return finish(
                q_p, SolveStatus.INFEASIBLE, [], 0, "inconsistent equality constraints"
            )
        Z = Vt[rank:].T
    else:
        q_p = np.zeros(s)
        Z = np.eye(s)

    if Z.shape[1] == 0:
        ok = problem.v.size == 0 or np.max(problem.S @ q_p - problem.v) <= feas_tol
        status = SolveStatus.OPTIMAL if ok else SolveStatus.INFEASIBLE
        active = (
            np.flatnonzero(np.abs(problem.S @ q_p - problem.v) <= feas_tol)
            if problem.v.size
            else []
        )
        return finish(q_p, status, active, 0, "" if ok else "equalities fix an infeasible point")

    Gz = Z.T @ G @ Z
    gz = Z.T @ (G @ q_p)
    Sz = problem.S @ Z
    vz = problem.v - problem.S @ q_p

    z0 = Z.T @ (np.asarray(warm_start, dtype=float) - q_p) if warm_start is not None else np.zeros(Z.shape[1])
    if vz.size and np.max(Sz @ z0 - vz) > 0.1 * feas_tol:
        z0 = _repair_small_violations(Sz, vz, z0, 0.1 * feas_tol)
    if vz.size and np.max(Sz @ z0 - vz) > 0.1 * feas_tol:
        z0 = _phase1_feasible_point(problem, q_p, Z, Sz, vz, z0, scale)
        if z0 is None:
            return finish(
                q_p, SolveStatus.INFEASIBLE, [], 0, "no point satisfies the constraints"
            )

    tight = (
        np.flatnonzero(np.abs(Sz @ z0 - vz) <= 1e-9 * scale).tolist()
        if vz.size
        else []
    )
    try:
        z, working, iters = _active_set_core(
            Gz, gz, Sz, vz, z0, tight, cfg.max_iter, cfg.opt_tol * scale
        )
        status = SolveStatus.OPTIMAL
        message = ""
    except _IterLimit as e:
        z, working, iters = e.z, e.working, e.used
        status = SolveStatus.ITER_LIMIT
        message = "iteration limit reached; returning best iterate"
    if vz.size:
        # polish away tolerance-level violations inherited from the start point
        z = _repair_small_violations(Sz, vz, z, 4e-15 * scale)
    q = q_p + Z @ z
    return finish(q, status, working, iters, message)

"""Brute-force QP reference: enumerate active sets, solve each KKT system.

Independent of the production solver: every subset of inequality rows is
treated as equalities, the stationarity system is solved directly, and the
best feasible candidate wins. Exponential in the number of inequality rows,
so only for tiny problems.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np


def enumerate_qp(R, A_eq, b_eq, S, v, tol=1e-9):
    """Global minimizer of min q^T R q s.t. A_eq q = b_eq, S q <= v.

    Returns (q, objective) or (None, None) when no candidate is feasible.
    """
    R = np.asarray(R, dtype=float)
    s = R.shape[0]
    m = S.shape[0]
    scale = max(
        1.0,
        float(np.max(np.abs(b_eq))) if b_eq.size else 0.0,
        float(np.max(np.abs(v))) if v.size else 0.0,
    )
    best_q, best_obj = None, np.inf

    for size in range(m + 1):
        for subset in combinations(range(m), size):
            rows = [A_eq] if A_eq.size else []
            rhs = [b_eq] if b_eq.size else []
            if subset:
                rows.append(S[list(subset)])
                rhs.append(v[list(subset)])
            if rows:
                E = np.vstack(rows)
                h = np.concatenate(rhs)
            else:
                E = np.zeros((0, s))
                h = np.zeros(0)

            # Stationarity: 2 R q + E^T y = 0 together with E q = h.
            k = E.shape[0]
            kkt = np.block([[2 * R, E.T], [E, np.zeros((k, k))]])
            rhs_full = np.concatenate([np.zeros(s), h])
            sol, *_ = np.linalg.lstsq(kkt, rhs_full, rcond=None)
            q = sol[:s]
            if np.linalg.norm(kkt @ sol - rhs_full) > tol * scale:
                continue  # that active set is inconsistent
            if k and np.max(np.abs(E @ q - h)) > tol * scale:
                continue
            if m and np.max(S @ q - v) > tol * scale:
                continue
            obj = float(q @ R @ q)
            if obj < best_obj - 1e-15:
                best_obj, best_q = obj, q
    if best_q is None:
        return None, None
    return best_q, best_obj

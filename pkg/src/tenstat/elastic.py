"""Linear-elastic cable model.

Each cable transmits F_i = kappa_i * (l_i - u_i) where u_i is the
controllable rest length. Force density q_i = F_i / l_i links the cable
model to the equilibrium constraint; the stored elastic energy is quadratic
in q, which is what the inverse-statics QP minimizes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .equilibrium import Coordinates
from .errors import EmptyFeasibleBox, NonPositiveLength, NonPositiveStiffness


@dataclass(frozen=True)
class TensionBounds:
    """Bounds for feasible cable actuation.

    min_density is the scalar lower bound on force density (avoids slack
    cables). min_rest_length bounds the controllable rest length from below
    (prevents negative cable lengths at the winch); scalar values broadcast
    per cable, None drops the saturation constraint entirely.
    """

    min_density: float
    min_rest_length: Union[float, np.ndarray, None] = None

    def __post_init__(self):
        if self.min_density <= 0:
            raise ValueError("min_density must be positive")

    def rest_length_vector(self, s: int) -> Optional[np.ndarray]:
        if self.min_rest_length is None:
            return None
        u_min = np.asarray(self.min_rest_length, dtype=float)
        if u_min.ndim == 0:
            u_min = np.full(s, float(u_min))
        return u_min


@dataclass(frozen=True)
class CableState:
    """Per-cable quantities for one pose and one force-density solution."""

    lengths: np.ndarray
    densities: np.ndarray
    tensions: np.ndarray
    rest_inputs: np.ndarray
    stiffness: np.ndarray

    @classmethod
    def from_densities(cls, q_s, lengths, kappa) -> "CableState":
        q_s = np.asarray(q_s, dtype=float)
        lengths = np.asarray(lengths, dtype=float)
        kappa = np.asarray(kappa, dtype=float)
        tensions = q_s * lengths
        return cls(
            lengths=lengths,
            densities=q_s,
            tensions=tensions,
            rest_inputs=lengths - tensions / kappa,
            stiffness=kappa,
        )


def member_lengths(C: np.ndarray, coords: Coordinates) -> np.ndarray:
    """Euclidean length of every member under the given coordinates."""
    diffs = [C @ axis for axis in coords.axes()]
    return np.sqrt(np.sum([d * d for d in diffs], axis=0))


def build_objective(kappa, cable_lengths) -> np.ndarray:
    """QP weight matrix R = diag(l_i^2 / kappa_i); q^T R q is twice the energy."""
    kappa = np.asarray(kappa, dtype=float)
    lengths = np.asarray(cable_lengths, dtype=float)
    if np.any(kappa <= 0):
        raise NonPositiveStiffness("all spring constants must be positive")
    if np.any(lengths <= 0):
        raise NonPositiveLength("all cable lengths must be positive")
    return np.diag(lengths**2 / kappa)


def build_inequality(
    kappa, cable_lengths, bounds: TensionBounds
) -> tuple[np.ndarray, np.ndarray]:
    """Inequality data (S, v) with S q_s <= v.

    Stacks the saturation rows L q <= K (l - u_min) (skipped when no
    minimum rest length is set) over the minimum-density rows -q <= -c.
    Raises EmptyFeasibleBox when some cable's box is empty on its own.
    """
    kappa = np.asarray(kappa, dtype=float)
    lengths = np.asarray(cable_lengths, dtype=float)
    s = lengths.size
    c = float(bounds.min_density)
    lower_S = -np.eye(s)
    lower_v = np.full(s, -c)
    u_min = bounds.rest_length_vector(s)
    if u_min is None:
        return lower_S, lower_v
    cap = kappa * (lengths - u_min)
    bad = np.flatnonzero(c * lengths > cap)
    if bad.size:
        raise EmptyFeasibleBox(bad.tolist())
    return np.vstack([np.diag(lengths), lower_S]), np.concatenate([cap, lower_v])


def rest_inputs_from_solution(q_s, cable_lengths, kappa) -> np.ndarray:
    """Rest-length control inputs u_i = l_i - q_i l_i / kappa_i.

    Warns on negative entries; the QP's saturation constraint should keep
    them positive.
    """
    q_s = np.asarray(q_s, dtype=float)
    lengths = np.asarray(cable_lengths, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    u = lengths - q_s * lengths / kappa
    if np.any(u < 0):
        warnings.warn(
            f"negative rest length for cable(s) {np.flatnonzero(u < 0).tolist()}",
            stacklevel=2,
        )
    return u


def potential_energy(q_s, kappa, cable_lengths) -> float:
    """Total elastic energy 1/2 sum q_i^2 l_i^2 / kappa_i, in Joules."""
    q_s = np.asarray(q_s, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    lengths = np.asarray(cable_lengths, dtype=float)
    return float(0.5 * np.sum(q_s**2 * lengths**2 / kappa))

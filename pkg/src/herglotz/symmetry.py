"""Discrete Noether theory: invariance residuals, momentum maps and the dissipation law.

A one-parameter symmetry is given only by its infinitesimal generator ``xi_Q`` on ``Q``;
its lift to ``Q x Q x R`` is ``(xi_Q(q0), xi_Q(q1), 0)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import DiscreteLagrangian, DiscreteState, _check_dim, as_point
from .discrete import Trajectory, _checked_sigma, rollout
from .errors import DimensionError, SymmetryError
from .newton import NewtonConfig

__all__ = [
    "InfinitesimalGenerator", "translation", "rotation", "invariance_residual", "momentum",
    "momentum_series", "dissipation_residual", "INVARIANCE_TOL",
]

INVARIANCE_TOL = 1e-10


@dataclass(frozen=True)
class InfinitesimalGenerator:
    """A vector field ``xi_Q`` on ``Q = R^n``."""

    dim: int
    field: Callable[[np.ndarray], np.ndarray]
    name: str = "xi"

    def __call__(self, q) -> np.ndarray:
        q = as_point(q, self.dim, "q")
        out = np.asarray(self.field(q), dtype=float).reshape(-1)
        if out.size != self.dim:
            raise DimensionError(f"generator {self.name} returned {out.size} components, expected {self.dim}")
        return out

    def lift(self, x: DiscreteState) -> np.ndarray:
        """Tangent vector ``(xi(q0), xi(q1), 0)`` in ``(q0, q1, z0)`` order."""
        return np.concatenate([self(x.q0), self(x.q1), [0.0]])


def translation(dim: int = 1, direction=None) -> InfinitesimalGenerator:
    """Constant field; defaults to ``(1, ..., 1)``."""
    d = np.ones(dim) if direction is None else as_point(direction, dim, "direction")
    d = d.copy()
    return InfinitesimalGenerator(dim, lambda q: d, name=f"translation{d.tolist()}")


def rotation(dim: int = 2, i: int = 0, j: int = 1) -> InfinitesimalGenerator:
    """Rotation in the ``(q_i, q_j)`` plane: ``xi_i = -q_j``, ``xi_j = q_i``."""
    if dim < 2 or not (0 <= i < dim and 0 <= j < dim) or i == j:
        raise ValueError("rotation needs dim >= 2 and two distinct axes")

    def field(q):
        out = np.zeros(dim)
        out[i] = -q[j]
        out[j] = q[i]
        return out

    return InfinitesimalGenerator(dim, field, name=f"rotation({i},{j})")


def _gen_dim_ok(Ld, gen):
    if gen.dim != Ld.dim:
        raise DimensionError(f"generator acts on R^{gen.dim}, Lagrangian on R^{Ld.dim}")


def invariance_residual(Ld: DiscreteLagrangian, x: DiscreteState, gen: InfinitesimalGenerator) -> float:
    """``D_1 L_d . xi(q0) + D_2 L_d . xi(q1)``, zero where ``L_d`` is infinitesimally invariant."""
    _check_dim(Ld, x.dim)
    _gen_dim_ok(Ld, gen)
    return float(Ld.d1(x.q0, x.q1, x.z0) @ gen(x.q0) + Ld.d2(x.q0, x.q1, x.z0) @ gen(x.q1))


def momentum(Ld: DiscreteLagrangian, x: DiscreteState, gen: InfinitesimalGenerator) -> float:
    """Discrete momentum ``(D_1 L_d / sigma_d) . xi(q0)``, the contraction of ``eta-`` with the lift."""
    _check_dim(Ld, x.dim)
    _gen_dim_ok(Ld, gen)
    s = _checked_sigma(Ld, x.q0, x.q1, x.z0)
    return float((Ld.d1(x.q0, x.q1, x.z0) / s) @ gen(x.q0))


def momentum_series(Ld: DiscreteLagrangian, traj: Trajectory, gen: InfinitesimalGenerator) -> np.ndarray:
    """Momentum at every state of a trajectory."""
    return np.array([momentum(Ld, x, gen) for x in traj.states])


def dissipation_residual(Ld: DiscreteLagrangian, x0: DiscreteState, N: int, gen: InfinitesimalGenerator,
                         cfg: NewtonConfig = NewtonConfig(), invariance_tol: float = INVARIANCE_TOL) -> float:
    """``max_k |J(P_{k+1}) - sigma_d(P_k) J(P_k)|`` over an ``N``-step rollout from ``x0``.

    Raises ``SymmetryError`` if ``L_d`` fails the invariance check at any visited state,
    since the law is only claimed for invariant Lagrangians.
    """
    traj = rollout(Ld, x0, N, cfg)
    for k, x in enumerate(traj.states):
        r = invariance_residual(Ld, x, gen)
        if not abs(r) <= invariance_tol:
            raise SymmetryError(f"{gen.name} is not a symmetry: invariance residual {r:.3e} at state {k}")
    J = momentum_series(Ld, traj, gen)
    if J.size < 2:
        return 0.0
    return float(np.max(np.abs(J[1:] - traj.sigma[:-1] * J[:-1])))

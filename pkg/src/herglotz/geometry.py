"""Numerical checks of the contact geometry of the discrete flows.

One-forms on ``Q x Q x R`` are stored in the product chart ``(dq0, dq1, dz0)``; tangent
maps are central finite-difference Jacobians of ``step`` and ``hamiltonian_step``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import _ArrayFields, CotangentState, DiscreteLagrangian, DiscreteState, _check_dim
from .discrete import (_checked_sigma, hamiltonian_step, inverse_legendre_minus, sigma_d, step)
from .errors import DimensionError
from .newton import NewtonConfig

__all__ = [
    "Covector", "DEFAULT_SEED", "FD_PERTURBATION", "eta_minus", "eta_plus", "step_jacobian",
    "hamiltonian_jacobian", "conformal_residual_minus", "conformal_residual_plus",
    "pullback_residual", "hamiltonian_conformal_residual", "random_states", "random_cotangents",
]

DEFAULT_SEED = 0xC0A7AC7
FD_PERTURBATION = 1e-6


@dataclass(frozen=True, eq=False)
class Covector(_ArrayFields):
    """Components of a one-form on ``Q x Q x R``."""

    dq0: np.ndarray
    dq1: np.ndarray
    dz0: float

    def __post_init__(self):
        dq0 = np.array(self.dq0, dtype=float, ndmin=1)
        dq1 = np.array(self.dq1, dtype=float, ndmin=1)
        if dq0.ndim != 1 or dq0.shape != dq1.shape:
            raise DimensionError("dq0 and dq1 must be vectors of equal length")
        dq0.setflags(write=False)
        dq1.setflags(write=False)
        object.__setattr__(self, "dq0", dq0)
        object.__setattr__(self, "dq1", dq1)
        object.__setattr__(self, "dz0", float(self.dz0))

    @property
    def dim(self) -> int:
        return self.dq0.size

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.dq0, self.dq1, [self.dz0]])

    def contract(self, vec) -> float:
        """Value on a tangent vector given in the same ``(q0, q1, z0)`` order."""
        return float(self.as_vector() @ np.asarray(vec, dtype=float))


def eta_minus(Ld: DiscreteLagrangian, x: DiscreteState) -> Covector:
    """``eta- = dz0 + (D_1 L_d / sigma_d) dq0``."""
    _check_dim(Ld, x.dim)
    s = _checked_sigma(Ld, x.q0, x.q1, x.z0)
    return Covector(Ld.d1(x.q0, x.q1, x.z0) / s, np.zeros(x.dim), 1.0)


def eta_plus(Ld: DiscreteLagrangian, x: DiscreteState) -> Covector:
    """``eta+ = sigma_d dz0 + D_1 L_d dq0``, i.e. ``sigma_d * eta-``."""
    _check_dim(Ld, x.dim)
    return Covector(Ld.d1(x.q0, x.q1, x.z0), np.zeros(x.dim), sigma_d(Ld, x))


def _central_jacobian(f: Callable[[np.ndarray], np.ndarray], u: np.ndarray) -> np.ndarray:
    m = u.size
    J = np.empty((m, m))
    for j in range(m):
        du = FD_PERTURBATION * (1.0 + abs(u[j]))
        up = u.copy()
        um = u.copy()
        up[j] += du
        um[j] -= du
        J[:, j] = (f(up) - f(um)) / (up[j] - um[j])
    return J


def step_jacobian(Ld: DiscreteLagrangian, x: DiscreteState, cfg: NewtonConfig = NewtonConfig()) -> np.ndarray:
    """Tangent map of ``step`` at ``x`` as a ``(2n+1) x (2n+1)`` matrix in ``(q0, q1, z0)`` order."""
    _check_dim(Ld, x.dim)
    return _central_jacobian(lambda u: step(Ld, DiscreteState.from_vector(u), cfg).as_vector(),
                             x.as_vector())


def hamiltonian_jacobian(Ld: DiscreteLagrangian, c: CotangentState, cfg: NewtonConfig = NewtonConfig()) -> np.ndarray:
    """Tangent map of ``hamiltonian_step`` at ``c`` in ``(q, p, z)`` order."""
    _check_dim(Ld, c.dim)
    return _central_jacobian(lambda u: hamiltonian_step(Ld, CotangentState.from_vector(u), cfg).as_vector(),
                             c.as_vector())


def conformal_residual_minus(Ld: DiscreteLagrangian, x: DiscreteState, cfg: NewtonConfig = NewtonConfig()) -> float:
    """``|| J^T eta-(step x) - sigma_d(x) eta-(x) ||_inf``."""
    J = step_jacobian(Ld, x, cfg)
    y = step(Ld, x, cfg)
    lhs = J.T @ eta_minus(Ld, y).as_vector()
    return float(np.max(np.abs(lhs - sigma_d(Ld, x) * eta_minus(Ld, x).as_vector())))


def conformal_residual_plus(Ld: DiscreteLagrangian, x: DiscreteState, cfg: NewtonConfig = NewtonConfig()) -> float:
    """``|| J^T eta+(step x) - sigma_d(step x) eta+(x) ||_inf``."""
    J = step_jacobian(Ld, x, cfg)
    y = step(Ld, x, cfg)
    lhs = J.T @ eta_plus(Ld, y).as_vector()
    return float(np.max(np.abs(lhs - sigma_d(Ld, y) * eta_plus(Ld, x).as_vector())))


def pullback_residual(Ld: DiscreteLagrangian, x: DiscreteState, cfg: NewtonConfig = NewtonConfig()) -> float:
    """``|| J^T eta-(step x) - eta+(x) ||_inf``: the flow pulls ``eta-`` back to ``eta+``."""
    J = step_jacobian(Ld, x, cfg)
    lhs = J.T @ eta_minus(Ld, step(Ld, x, cfg)).as_vector()
    return float(np.max(np.abs(lhs - eta_plus(Ld, x).as_vector())))


def _canonical_form(c: CotangentState) -> np.ndarray:
    # dz - p dq in (q, p, z) order
    return np.concatenate([-c.p, np.zeros(c.dim), [1.0]])


def hamiltonian_conformal_residual(Ld: DiscreteLagrangian, c: CotangentState,
                                   cfg: NewtonConfig = NewtonConfig()) -> float:
    """Pullback residual of ``dz - p dq`` under the discrete Hamiltonian flow.

    The conformal factor is ``sigma_d`` at ``(F- L_d)^{-1}(c)``.
    """
    J = hamiltonian_jacobian(Ld, c, cfg)
    x = inverse_legendre_minus(Ld, c, cfg=cfg)
    image = hamiltonian_step(Ld, c, cfg)
    lhs = J.T @ _canonical_form(image)
    return float(np.max(np.abs(lhs - sigma_d(Ld, x) * _canonical_form(c))))


def random_states(count: int, dim: int, seed: int = DEFAULT_SEED, low: float = -2.0,
                  high: float = 2.0) -> list:
    """``count`` discrete states with every coordinate uniform in ``[low, high]``."""
    rng = np.random.default_rng(seed)
    return [DiscreteState.from_vector(rng.uniform(low, high, 2 * dim + 1)) for _ in range(int(count))]


def random_cotangents(count: int, dim: int, seed: int = DEFAULT_SEED, qp_range: float = 2.0,
                      z_range: float = 1.0) -> list:
    """``count`` cotangent points, ``q, p`` uniform in ``[-qp_range, qp_range]``, ``z`` in ``[-z_range, z_range]``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(int(count)):
        qp = rng.uniform(-qp_range, qp_range, 2 * dim)
        out.append(CotangentState(qp[:dim], qp[dim:], rng.uniform(-z_range, z_range)))
    return out

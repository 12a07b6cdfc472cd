"""The discrete Herglotz integrator.

A step maps ``(q0, q1, z0)`` to ``(q1, q2, z1)`` with ``z1 = z0 + L_d(q0, q1, z0)`` and
``q2`` solving the momentum matching condition

    D_1 L_d(q1, q2, z1) + (1 + D_z L_d(q1, q2, z1)) D_2 L_d(q0, q1, z0) = 0,

i.e. ``F+ L_d(q0, q1, z0) = F- L_d(q1, q2, z1)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import CotangentState, DiscreteLagrangian, DiscreteState, _check_dim, as_point
from .errors import DegenerateStepError, HerglotzError, RolloutError
from .newton import NewtonConfig, newton_solve

__all__ = [
    "NewtonConfig", "Trajectory", "sigma_d", "z_update", "legendre_minus", "legendre_plus",
    "step", "rollout", "inverse_legendre_minus", "hamiltonian_step", "DEGENERATE_SIGMA",
]

DEGENERATE_SIGMA = 1e-12


def sigma_d(Ld: DiscreteLagrangian, x: DiscreteState) -> float:
    """Discrete conformal factor ``1 + D_z L_d(x)``."""
    return 1.0 + Ld.dz(x.q0, x.q1, x.z0)


def _checked_sigma(Ld, q0, q1, z0) -> float:
    s = 1.0 + Ld.dz(q0, q1, z0)
    if not np.isfinite(s) or abs(s) < DEGENERATE_SIGMA:
        raise DegenerateStepError(
            f"degenerate step: sigma_d = 1 + D_z L_d = {s:.3e} at q0={np.asarray(q0).tolist()}, "
            f"q1={np.asarray(q1).tolist()}, z0={float(z0)}",
            state=(np.array(q0), np.array(q1), float(z0)), sigma=s,
        )
    return s


def z_update(Ld: DiscreteLagrangian, x: DiscreteState) -> float:
    return x.z0 + Ld.value(x.q0, x.q1, x.z0)


def legendre_minus(Ld: DiscreteLagrangian, x: DiscreteState) -> CotangentState:
    """``F- L_d(x) = (q0, -D_1 L_d / sigma_d, z0)``."""
    _check_dim(Ld, x.dim)
    s = _checked_sigma(Ld, x.q0, x.q1, x.z0)
    return CotangentState(x.q0, -Ld.d1(x.q0, x.q1, x.z0) / s, x.z0)


def legendre_plus(Ld: DiscreteLagrangian, x: DiscreteState) -> CotangentState:
    """``F+ L_d(x) = (q1, D_2 L_d, z0 + L_d)``."""
    _check_dim(Ld, x.dim)
    return CotangentState(x.q1, Ld.d2(x.q0, x.q1, x.z0), z_update(Ld, x))


def _solve_legendre_minus(Ld, q, p, z, guess, cfg: NewtonConfig) -> np.ndarray:
    """Find ``q1`` near ``guess`` with ``D_1 L_d(q, q1, z) + sigma_d(q, q1, z) p = 0``."""

    def residual(q1):
        return Ld.d1(q, q1, z) + (1.0 + Ld.dz(q, q1, z)) * p

    def analytic_jacobian(q1):
        return Ld.d1_q1(q, q1, z) + np.outer(p, Ld.dz_q1(q, q1, z))

    have = Ld.d1_q1(q, guess, z) is not None and Ld.dz_q1(q, guess, z) is not None
    jacobian = analytic_jacobian if have else None

    scale = max(1.0, float(np.max(np.abs(p))))
    q1, _ = newton_solve(residual, guess, cfg, jacobian=jacobian, scale=scale,
                         what="momentum matching")
    _checked_sigma(Ld, q, q1, z)
    return q1


def step(Ld: DiscreteLagrangian, x: DiscreteState, cfg: NewtonConfig = NewtonConfig()) -> DiscreteState:
    """One step of the discrete Lagrangian flow ``Phi_d``.

    The Newton iteration for ``q2`` starts from ``2 q1 - q0``.
    """
    _check_dim(Ld, x.dim)
    _checked_sigma(Ld, x.q0, x.q1, x.z0)
    plus = legendre_plus(Ld, x)
    q2 = _solve_legendre_minus(Ld, x.q1, plus.p, plus.z, 2.0 * x.q1 - x.q0, cfg)
    return DiscreteState(x.q1, q2, plus.z)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Discrete states ``x_0..x_N`` of a rollout with the conformal factor at each state.

    ``q`` holds ``q_0..q_{N+1}``; ``z`` holds ``z_0..z_N``.
    """

    states: Tuple[DiscreteState, ...]
    h: Optional[float]
    sigma: np.ndarray

    @property
    def steps(self) -> int:
        return len(self.states) - 1

    @property
    def q(self) -> np.ndarray:
        return np.array([s.q0 for s in self.states] + [self.states[-1].q1])

    @property
    def z(self) -> np.ndarray:
        return np.array([s.z0 for s in self.states])

    @property
    def times(self) -> np.ndarray:
        """Times ``k h`` of the states (requires a discretization step)."""
        if self.h is None:
            raise ValueError("trajectory has no time step")
        return self.h * np.arange(len(self.states))


def rollout(Ld: DiscreteLagrangian, x0: DiscreteState, N: int, cfg: NewtonConfig = NewtonConfig()) -> Trajectory:
    """Iterate ``step`` ``N`` times from ``x0``.

    A failing step raises ``RolloutError`` with the step index and the partial trajectory.
    """
    if int(N) < 0:
        raise ValueError("N must be non-negative")
    states = [x0]
    sigmas = []
    for k in range(int(N) + 1):
        x = states[-1]
        try:
            sigmas.append(_checked_sigma(Ld, x.q0, x.q1, x.z0))
            if k < N:
                states.append(step(Ld, x, cfg))
        except HerglotzError as exc:
            partial = Trajectory(tuple(states[:len(sigmas)]), Ld.h, np.array(sigmas))
            raise RolloutError(f"step {k} failed: {exc}", index=k, partial=partial, cause=exc) from exc
    return Trajectory(tuple(states), Ld.h, np.array(sigmas))


def inverse_legendre_minus(Ld: DiscreteLagrangian, c: CotangentState, guess=None,
                           cfg: NewtonConfig = NewtonConfig()) -> DiscreteState:
    """``(F- L_d)^{-1}(c)``: the state ``(c.q, q1, c.z)`` whose negative Legendre transform is ``c``.

    Without ``guess`` the iteration starts from ``q + h p`` (or ``q`` if ``Ld.h`` is unset).
    """
    _check_dim(Ld, c.dim)
    if guess is None:
        guess = c.q + (Ld.h or 0.0) * c.p
    guess = as_point(guess, c.dim, "guess")
    q1 = _solve_legendre_minus(Ld, c.q, c.p, c.z, np.array(guess), cfg)
    return DiscreteState(c.q, q1, c.z)


def hamiltonian_step(Ld: DiscreteLagrangian, c: CotangentState, cfg: NewtonConfig = NewtonConfig()) -> CotangentState:
    """Discrete Hamiltonian flow ``F+ L_d o (F- L_d)^{-1}`` on ``T*Q x R``."""
    return legendre_plus(Ld, inverse_legendre_minus(Ld, c, cfg=cfg))

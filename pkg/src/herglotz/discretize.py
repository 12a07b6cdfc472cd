"""Constructors of discrete Lagrangians.

* ``midpoint_discrete``   -- midpoint quadrature of a mechanical Lagrangian,
* ``free_particle_exact`` -- closed-form exact discrete Lagrangian of the damped free particle,
* ``exact_discrete``      -- exact discrete Lagrangian of any regular model, by shooting.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .continuous import FlowConfig, advance
from .core import (ContinuousState, DiscreteLagrangian, DiscreteState, LagrangianModel,
                   MechanicalLagrangian, _check_dim)
from .errors import NonFiniteStateError, ShootingError
from .newton import NewtonConfig


class MidpointLagrangian(DiscreteLagrangian):
    """``L_d = |q1 - q0|^2 / (2h) - h V((q0 + q1)/2) + h gamma z0``."""

    def __init__(self, model: MechanicalLagrangian, h: float):
        if not isinstance(model, MechanicalLagrangian):
            raise TypeError("midpoint_discrete needs a MechanicalLagrangian")
        if not h > 0:
            raise ValueError("time step h must be positive")
        super().__init__(model.dim, h=h)
        self.model = model
        self.gamma = model.gamma

    def value(self, q0, q1, z0):
        dq = np.asarray(q1, float) - np.asarray(q0, float)
        mid = 0.5 * (np.asarray(q0, float) + np.asarray(q1, float))
        h = self.h
        return float(dq @ dq / (2 * h) - h * self.model.potential.value(mid) + h * self.gamma * z0)

    def _pieces(self, q0, q1):
        q0 = np.asarray(q0, float)
        q1 = np.asarray(q1, float)
        return (q1 - q0) / self.h, 0.5 * self.h * self.model.potential.gradient(0.5 * (q0 + q1))

    def d1(self, q0, q1, z0):
        vel, force = self._pieces(q0, q1)
        return -vel - force

    def d2(self, q0, q1, z0):
        vel, force = self._pieces(q0, q1)
        return vel - force

    def dz(self, q0, q1, z0):
        return self.h * self.gamma

    def d1_q1(self, q0, q1, z0):
        mid = 0.5 * (np.asarray(q0, float) + np.asarray(q1, float))
        return -np.eye(self.dim) / self.h - 0.25 * self.h * self.model.potential.hessian(mid)

    def dz_q1(self, q0, q1, z0):
        return np.zeros(self.dim)


class FreeParticleExact(DiscreteLagrangian):
    """Exact discrete Lagrangian of ``L = |v|^2/2 + gamma z``.

    ``L_h^e = c |q1 - q0|^2 / 2 + z0 (e^{gamma h} - 1)`` with ``c = gamma e^{gamma h} / (e^{gamma h} - 1)``.
    """

    def __init__(self, gamma: float, h: float, dim: int = 1):
        if gamma == 0:
            raise ValueError("free_particle_exact is singular at gamma = 0; use midpoint or shooting")
        if not h > 0:
            raise ValueError("time step h must be positive")
        super().__init__(dim, h=h)
        self.gamma = float(gamma)
        self._e = math.exp(self.gamma * self.h)
        self._c = self.gamma * self._e / (self._e - 1.0)

    def value(self, q0, q1, z0):
        dq = np.asarray(q1, float) - np.asarray(q0, float)
        return float(0.5 * self._c * (dq @ dq) + z0 * (self._e - 1.0))

    def d1(self, q0, q1, z0):
        return -self._c * (np.asarray(q1, float) - np.asarray(q0, float))

    def d2(self, q0, q1, z0):
        return self._c * (np.asarray(q1, float) - np.asarray(q0, float))

    def dz(self, q0, q1, z0):
        return self._e - 1.0

    def d1_q1(self, q0, q1, z0):
        return -self._c * np.eye(self.dim)

    def dz_q1(self, q0, q1, z0):
        return np.zeros(self.dim)


@dataclass(frozen=True)
class ShootingConfig:
    """Settings of the shooting solve behind the exact retraction.

    The default Newton tolerance is one order tighter than ``NewtonConfig()`` so that the
    partials of ``L_h^e`` are accurate enough for a default-tolerance momentum-matching solve.
    """

    newton: NewtonConfig = NewtonConfig(abs_tol=1e-13, rel_tol=1e-13)
    flow_cfg: FlowConfig = FlowConfig()
    velocity_guess_mode: str = "finite_difference"

    def __post_init__(self):
        if self.velocity_guess_mode != "finite_difference":
            raise ValueError(f"unknown velocity_guess_mode {self.velocity_guess_mode!r}")


@dataclass(frozen=True, eq=False)
class ExactStepData:
    """The flow segment joining ``q0`` to ``q1`` in time ``h``.

    ``end_jacobian`` is ``d q(h) / d v0`` and ``db_dv0`` the gradient of ``b_h`` with respect to
    ``v0``; both come from the shooting perturbations and feed the second derivatives of the
    exact discrete Lagrangian.
    """

    v0: np.ndarray
    end_state: ContinuousState
    b_h: float
    end_jacobian: Optional[np.ndarray] = field(default=None, repr=False)
    db_dv0: Optional[np.ndarray] = field(default=None, repr=False)


def shoot(model: LagrangianModel, h: float, x: DiscreteState,
          cfg: ShootingConfig = ShootingConfig(), v_guess=None) -> ExactStepData:
    """Find ``v0`` with ``flow((q0, v0, z0), h).q = q1`` by Newton on the endpoint map.

    Newton starts from ``v_guess`` if given, else from ``(q1 - q0) / h``.
    If the residual stops decreasing above tolerance (typically finite-difference noise in a
    model without analytic second derivatives) a ``ShootingError`` is raised early.
    The Jacobian ``d q(h) / d v0`` is a central finite difference; the ``2n`` perturbed
    trajectories are integrated alongside the nominal one as a batch.
    """
    _check_dim(model, x.dim)
    if not h > 0:
        raise ValueError("time step h must be positive")
    n = x.dim
    ncfg = cfg.newton
    q0, q1, z0 = x.q0, x.q1, x.z0
    v = (q1 - q0) / h if v_guess is None else np.array(v_guess, dtype=float)
    tol = ncfg.tolerance(max(1.0, float(np.max(np.abs(q1)))))
    Q = np.tile(q0, (2 * n + 1, 1))
    Z = np.full(2 * n + 1, z0)
    r = None
    best, stalled = np.inf, 0
    for it in range(ncfg.max_iters + 1):
        dv = ncfg.fd_step_scale * (1.0 + np.abs(v))
        V = np.tile(v, (2 * n + 1, 1))
        idx = np.arange(n)
        V[1 + 2 * idx, idx] += dv
        V[2 + 2 * idx, idx] -= dv
        try:
            qe, ve, ze, be = advance(model, Q, V, Z, h, cfg.flow_cfg)
        except NonFiniteStateError as exc:
            raise ShootingError(f"shooting diverged for {x}", iterate=v, residual=r, iterations=it) from exc
        widths = V[1 + 2 * idx, idx] - V[2 + 2 * idx, idx]
        J = ((qe[1 + 2 * idx] - qe[2 + 2 * idx]) / widths[:, None]).T
        r = qe[0] - q1
        if np.max(np.abs(r)) <= tol:
            if isinstance(model, MechanicalLagrangian):
                b_h, db = model.gamma * h, np.zeros(n)
            else:
                b_h, db = float(be[0]), (be[1 + 2 * idx] - be[2 + 2 * idx]) / widths
            return ExactStepData(v.copy(), ContinuousState(qe[0], ve[0], ze[0]), float(b_h), J, db)
        rn = float(np.max(np.abs(r)))
        stalled = stalled + 1 if rn > 0.5 * best else 0
        best = min(best, rn)
        if stalled >= 4:
            raise ShootingError(
                f"shooting stalled at |r|_inf = {rn:.3e} > {tol:.1e} for {x}; the flow is too noisy "
                "for this tolerance (supply analytic derivatives or loosen ShootingConfig.newton)",
                iterate=v, residual=r, iterations=it)
        if it == ncfg.max_iters:
            break
        try:
            v = v - np.linalg.solve(J, r)
        except np.linalg.LinAlgError as exc:
            raise ShootingError(f"singular shooting Jacobian for {x}", iterate=v, residual=r,
                                iterations=it) from exc
    raise ShootingError(
        f"shooting did not converge for {x} (|r|_inf = {np.max(np.abs(r)):.3e}); "
        "endpoints are probably outside the neighbourhood where the exponential map is invertible",
        iterate=v, residual=r, iterations=ncfg.max_iters,
    )


def exact_retraction(model: LagrangianModel, h: float, x: DiscreteState,
                     cfg: ShootingConfig = ShootingConfig()) -> ContinuousState:
    """Local inverse of the contact exponential map: ``(q0, q1, z0) -> (q0, v0, z0)``."""
    return ContinuousState(x.q0, shoot(model, h, x, cfg).v0, x.z0)


def exact_retraction_plus(model: LagrangianModel, h: float, x: DiscreteState,
                          cfg: ShootingConfig = ShootingConfig()) -> ContinuousState:
    """Time-``h`` flow of the retraction: the state at the far end of the segment."""
    return shoot(model, h, x, cfg).end_state


class ExactDiscreteLagrangian(DiscreteLagrangian):
    """Exact discrete Lagrangian ``L_h^e`` of a regular model, evaluated by shooting.

    The value is the ``z`` increment along the connecting segment. Partials come from the
    segment itself (``D_1 = -dL/dv(start) e^b``, ``D_2 = dL/dv(end)``, ``D_z = e^b - 1``),
    never from differentiating through the solver. Segments are cached per endpoint triple,
    and a new shooting solve is warm-started from the last segment leaving the same
    ``(q0, z0)`` (one Newton step of the endpoint map from that solution).
    """

    def __init__(self, model: LagrangianModel, h: float, cfg: ShootingConfig = ShootingConfig(),
                 cache_size: int = 4096):
        if not h > 0:
            raise ValueError("time step h must be positive")
        super().__init__(model.dim, h=h)
        self.model = model
        self.cfg = cfg
        self._segment = functools.lru_cache(maxsize=cache_size)(self._compute_segment)
        # warm-start hints keyed by (q0, z0); racing writers only affect the initial guess
        self._hints = {}

    def _compute_segment(self, key):
        n = self.dim
        x = DiscreteState(key[:n], key[n:2 * n], key[-1])
        base = key[:n] + key[-1:]
        hint = self._hints.get(base)
        guess = None
        if hint is not None:
            q1_prev, seg = hint
            try:
                guess = seg.v0 + np.linalg.solve(seg.end_jacobian, x.q1 - q1_prev)
            except np.linalg.LinAlgError:
                guess = None
        try:
            seg = shoot(self.model, self.h, x, self.cfg, v_guess=guess)
        except ShootingError:
            if guess is None:
                raise
            seg = shoot(self.model, self.h, x, self.cfg)
        if len(self._hints) > 4 * self._segment.cache_info().maxsize:
            self._hints.clear()
        self._hints[base] = (x.q1, seg)
        return seg

    def segment(self, q0, q1, z0) -> ExactStepData:
        key = tuple(np.asarray(q0, float).tolist()) + tuple(np.asarray(q1, float).tolist()) + (float(z0),)
        return self._segment(key)

    def value(self, q0, q1, z0):
        return self.segment(q0, q1, z0).end_state.z - float(z0)

    def d1(self, q0, q1, z0):
        seg = self.segment(q0, q1, z0)
        return -np.asarray(self.model.dL_dv(np.asarray(q0, float), seg.v0, float(z0))) * math.exp(seg.b_h)

    def d2(self, q0, q1, z0):
        end = self.segment(q0, q1, z0).end_state
        return np.asarray(self.model.dL_dv(end.q, end.v, end.z), dtype=float)

    def dz(self, q0, q1, z0):
        return math.exp(self.segment(q0, q1, z0).b_h) - 1.0

    def d1_q1(self, q0, q1, z0):
        seg = self.segment(q0, q1, z0)
        q0 = np.asarray(q0, float)
        jinv = np.linalg.inv(seg.end_jacobian)
        W0 = self.model.d2L_dvdv(q0, seg.v0, float(z0))
        p0 = self.model.dL_dv(q0, seg.v0, float(z0))
        return -math.exp(seg.b_h) * (W0 @ jinv + np.outer(p0, seg.db_dv0 @ jinv))

    def dz_q1(self, q0, q1, z0):
        seg = self.segment(q0, q1, z0)
        return math.exp(seg.b_h) * (seg.db_dv0 @ np.linalg.inv(seg.end_jacobian))


def midpoint_discrete(model: MechanicalLagrangian, h: float) -> MidpointLagrangian:
    return MidpointLagrangian(model, h)


def free_particle_exact(gamma: float, h: float, dim: int = 1) -> FreeParticleExact:
    return FreeParticleExact(gamma, h, dim)


def exact_discrete(model: LagrangianModel, h: float, cfg: ShootingConfig = ShootingConfig()) -> ExactDiscreteLagrangian:
    return ExactDiscreteLagrangian(model, h, cfg)

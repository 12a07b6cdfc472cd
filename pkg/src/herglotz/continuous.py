"""Continuous-time reference dynamics: Herglotz vector field, fixed-step RK4 flow,
the contact action functional and the conformal factor."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .core import ContinuousState, LagrangianModel, MechanicalLagrangian, _check_dim
from .errors import DimensionError, NonFiniteStateError


@dataclass(frozen=True)
class FlowConfig:
    """Fixed-step classical fourth-order Runge-Kutta settings."""

    substeps_per_unit_time: int = 1000
    method: str = "rk4"

    def __post_init__(self):
        if int(self.substeps_per_unit_time) < 1:
            raise ValueError("substeps_per_unit_time must be >= 1")
        if self.method != "rk4":
            raise ValueError(f"unsupported method {self.method!r}; only 'rk4' is available")

    def substeps(self, t: float) -> int:
        """Number of RK4 steps used to cover an interval of length ``t``."""
        return max(1, math.ceil(t * self.substeps_per_unit_time - 1e-9))


@dataclass(frozen=True, eq=False)
class CurveSamples:
    """A curve on ``Q`` sampled at strictly increasing times; ``points`` has shape ``(m+1, n)``."""

    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        points = np.array(self.points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        if times.ndim != 1 or points.ndim != 2 or points.shape[0] != times.size:
            raise DimensionError("need one point per sample time")
        if times.size >= 2 and np.any(np.diff(times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        times.setflags(write=False)
        points.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "points", points)


def herglotz_field(model: LagrangianModel, s: ContinuousState) -> Tuple[np.ndarray, np.ndarray, float]:
    """Vector field ``(dq, dv, dz)`` of the Herglotz equations at ``s``.

    Raises ``RegularityError`` if the velocity Hessian is singular.
    """
    _check_dim(model, s.dim)
    dv = model.acceleration(s.q, s.v, s.z)
    return s.v.copy(), np.asarray(dv, dtype=float), float(model.L(s.q, s.v, s.z))


def advance(model: LagrangianModel, q, v, z, t: float, cfg: FlowConfig = FlowConfig()):
    """Advance (possibly batched) states by time ``t`` with fixed-step RK4.

    Besides ``(q, v, z)`` the integral ``b = int_0^t dL/dz`` is carried along.
    Arrays may have leading batch axes. Returns ``(q, v, z, b)``.
    """
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    z = np.asarray(z, dtype=float)
    if t < 0:
        raise ValueError("flow time must be non-negative")
    if t == 0:
        return q.copy(), v.copy(), z.copy(), np.zeros_like(z)
    n = q.shape[-1]
    # packed layout along the last axis: [q (n), v (n), z, b]
    Y = np.concatenate([q, v, z[..., None], np.zeros_like(z)[..., None]], axis=-1)
    rhs = model.flow_rhs

    def f(Y):
        qq = Y[..., :n]
        vv = Y[..., n:2 * n]
        acc, lag, dldz = rhs(qq, vv, Y[..., 2 * n])
        lag = np.asarray(lag)[..., None]
        dldz = np.broadcast_to(dldz, lag.shape[:-1])[..., None]
        return np.concatenate([vv, acc, lag, dldz], axis=-1)

    m = cfg.substeps(t)
    dt = t / m
    half = 0.5 * dt
    sixth = dt / 6.0
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(m):
            k1 = f(Y)
            k2 = f(Y + half * k1)
            k3 = f(Y + half * k2)
            k4 = f(Y + dt * k3)
            Y = Y + sixth * (k1 + 2.0 * (k2 + k3) + k4)
    if not np.all(np.isfinite(Y)):
        raise NonFiniteStateError(f"flow produced a non-finite state after t={t}")
    return Y[..., :n], Y[..., n:2 * n], Y[..., 2 * n], Y[..., 2 * n + 1]


def flow(model: LagrangianModel, s0: ContinuousState, t: float, cfg: FlowConfig = FlowConfig()) -> ContinuousState:
    """Numerical Herglotz flow of ``s0`` at time ``t >= 0``."""
    _check_dim(model, s0.dim)
    q, v, z, _ = advance(model, s0.q, s0.v, s0.z, t, cfg)
    return ContinuousState(q, v, z)


def flow_samples(model: LagrangianModel, s0: ContinuousState, h: float, count: int,
                 cfg: FlowConfig = FlowConfig()) -> List[ContinuousState]:
    """States at times ``k*h`` for ``k = 0..count``, integrating interval by interval."""
    _check_dim(model, s0.dim)
    out = [s0]
    q, v, z = s0.q, s0.v, s0.z
    for _ in range(int(count)):
        q, v, z, _b = advance(model, q, v, z, h, cfg)
        out.append(ContinuousState(q, v, z))
    return out


def conformal_factor(model: LagrangianModel, s0: ContinuousState, t: float,
                     cfg: FlowConfig = FlowConfig()) -> float:
    """``sigma(t) = exp(-int_0^t dL/dz)`` along the flow from ``s0``."""
    _check_dim(model, s0.dim)
    if t < 0:
        raise ValueError("flow time must be non-negative")
    if isinstance(model, MechanicalLagrangian):
        return math.exp(-model.gamma * t)
    _, _, _, b = advance(model, s0.q, s0.v, s0.z, t, cfg)
    return float(np.exp(-b))


def contact_action(model: LagrangianModel, curve: CurveSamples, z0: float) -> float:
    """Endpoint value of ``dz/dt = L(c, c', z)``, ``z(t_0) = z0``, along a sampled curve.

    Velocities are central differences in the interior and one-sided at the ends;
    between samples the curve is the cubic Hermite interpolant and ``z`` advances by RK4.
    """
    t = curve.times
    Q = curve.points
    if t.size < 2:
        raise ValueError("contact_action needs at least two samples")
    if Q.shape[1] != model.dim:
        raise DimensionError(f"curve has dimension {Q.shape[1]}, model expects {model.dim}")
    V = np.gradient(Q, t, axis=0, edge_order=2 if t.size >= 3 else 1)
    z = float(z0)
    for k in range(t.size - 1):
        dt = t[k + 1] - t[k]
        qa, qb, va, vb = Q[k], Q[k + 1], V[k], V[k + 1]
        qm = 0.5 * (qa + qb) + dt * (va - vb) / 8.0
        vm = 1.5 * (qb - qa) / dt - 0.25 * (va + vb)
        k1 = float(model.L(qa, va, z))
        k2 = float(model.L(qm, vm, z + 0.5 * dt * k1))
        k3 = float(model.L(qm, vm, z + 0.5 * dt * k2))
        k4 = float(model.L(qb, vb, z + dt * k3))
        z += dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
    return z

"""Domain types, the mechanical Lagrangian family and the continuous Legendre transform.

Configuration space is ``R^n`` in a single global chart. Points are plain 1-D float
arrays; states on ``TQ x R``, ``Q x Q x R`` and ``T*Q x R`` are small frozen
dataclasses holding read-only arrays.

Every evaluator in this module broadcasts over leading axes: positions and velocities
may have shape ``(..., n)`` with ``z`` of shape ``(...)``. The flow integrator relies on
this to advance several shooting perturbations at once.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DimensionError, NonFiniteStateError, RegularityError

# relative FD steps: first derivatives of values, second derivatives (FD of derivatives)
FD_STEP = 1e-5
FD_STEP_SECOND = 1e-4
# condition number above which the velocity Hessian counts as singular
SINGULAR_COND = 1e12


def as_point(x, dim: Optional[int] = None, name: str = "point") -> np.ndarray:
    """Return ``x`` as a finite, read-only 1-D float array (a point of ``Q = R^n``)."""
    arr = np.array(x, dtype=float, ndmin=1)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"{name} must be a non-empty vector, got shape {arr.shape}")
    if dim is not None and arr.size != dim:
        raise DimensionError(f"{name} has dimension {arr.size}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteStateError(f"{name} has non-finite entries: {arr}")
    arr.setflags(write=False)
    return arr


def _as_scalar(z, name: str) -> float:
    z = float(z)
    if not np.isfinite(z):
        raise NonFiniteStateError(f"{name} is not finite: {z}")
    return z


class _ArrayFields:
    """Value equality for frozen dataclasses holding arrays; instances are unhashable."""

    __hash__ = None

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return all(np.array_equal(getattr(self, f), getattr(other, f)) for f in self.__dataclass_fields__)


@dataclass(frozen=True, eq=False)
class ContinuousState(_ArrayFields):
    """A point ``(q, v, z)`` of ``TQ x R``."""

    q: np.ndarray
    v: np.ndarray
    z: float

    def __post_init__(self):
        q = as_point(self.q, name="q")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "v", as_point(self.v, q.size, name="v"))
        object.__setattr__(self, "z", _as_scalar(self.z, "z"))

    @property
    def dim(self) -> int:
        return self.q.size


@dataclass(frozen=True, eq=False)
class DiscreteState(_ArrayFields):
    """A point ``(q0, q1, z0)`` of ``Q x Q x R``; the state of the discrete flow."""

    q0: np.ndarray
    q1: np.ndarray
    z0: float

    def __post_init__(self):
        q0 = as_point(self.q0, name="q0")
        object.__setattr__(self, "q0", q0)
        object.__setattr__(self, "q1", as_point(self.q1, q0.size, name="q1"))
        object.__setattr__(self, "z0", _as_scalar(self.z0, "z0"))

    @property
    def dim(self) -> int:
        return self.q0.size

    def as_vector(self) -> np.ndarray:
        """Flatten in the order ``(q0, q1, z0)``."""
        return np.concatenate([self.q0, self.q1, [self.z0]])

    @classmethod
    def from_vector(cls, vec) -> "DiscreteState":
        vec = np.asarray(vec, dtype=float)
        n = (vec.size - 1) // 2
        if vec.ndim != 1 or vec.size != 2 * n + 1 or n < 1:
            raise DimensionError(f"cannot split a vector of size {vec.size} into (q0, q1, z0)")
        return cls(vec[:n], vec[n:2 * n], vec[-1])


@dataclass(frozen=True, eq=False)
class CotangentState(_ArrayFields):
    """A point ``(q, p, z)`` of ``T*Q x R`` with canonical contact form ``dz - p dq``."""

    q: np.ndarray
    p: np.ndarray
    z: float

    def __post_init__(self):
        q = as_point(self.q, name="q")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", as_point(self.p, q.size, name="p"))
        object.__setattr__(self, "z", _as_scalar(self.z, "z"))

    @property
    def dim(self) -> int:
        return self.q.size

    def as_vector(self) -> np.ndarray:
        """Flatten in the order ``(q, p, z)``."""
        return np.concatenate([self.q, self.p, [self.z]])

    @classmethod
    def from_vector(cls, vec) -> "CotangentState":
        vec = np.asarray(vec, dtype=float)
        n = (vec.size - 1) // 2
        if vec.ndim != 1 or vec.size != 2 * n + 1 or n < 1:
            raise DimensionError(f"cannot split a vector of size {vec.size} into (q, p, z)")
        return cls(vec[:n], vec[n:2 * n], vec[-1])


# -- finite differences over the last axis -------------------------------------------

def fd_gradient(func: Callable, x, step: float = FD_STEP) -> np.ndarray:
    """Central-difference gradient of a scalar-valued ``func`` along the last axis of ``x``."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape)
    for i in range(x.shape[-1]):
        dx = step * (1.0 + np.abs(x[..., i]))
        xp = x.copy()
        xm = x.copy()
        xp[..., i] += dx
        xm[..., i] -= dx
        out[..., i] = (func(xp) - func(xm)) / (xp[..., i] - xm[..., i])
    return out


def fd_jacobian(func: Callable, x, step: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian ``J[..., i, j] = d func_i / d x_j``."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.shape[-1]):
        dx = step * (1.0 + np.abs(x[..., i]))
        xp = x.copy()
        xm = x.copy()
        xp[..., i] += dx
        xm[..., i] -= dx
        denom = (xp[..., i] - xm[..., i])[..., None]
        cols.append((np.asarray(func(xp)) - np.asarray(func(xm))) / denom)
    return np.stack(cols, axis=-1)


def fd_scalar(func: Callable, z, step: float = FD_STEP) -> np.ndarray:
    """Central-difference derivative with respect to a scalar (or batch of scalars) ``z``."""
    z = np.asarray(z, dtype=float)
    dz = step * (1.0 + np.abs(z))
    zp, zm = z + dz, z - dz
    fp, fm = np.asarray(func(zp)), np.asarray(func(zm))
    denom = zp - zm
    if fp.ndim > np.ndim(z):
        denom = np.expand_dims(denom, -1)
    return (fp - fm) / denom


# -- potentials -----------------------------------------------------------------------

class Potential:
    """A potential ``V(q)`` with gradient and (optionally) Hessian evaluators.

    Missing derivatives are replaced by central finite differences. Callables must
    broadcast over leading axes of ``q``.
    """

    def __init__(self, value: Callable, gradient: Optional[Callable] = None,
                 hessian: Optional[Callable] = None, name: str = "custom"):
        self._value = value
        self._gradient = gradient
        self._hessian = hessian
        self.name = name

    def value(self, q):
        return self._value(np.asarray(q, dtype=float))

    def gradient(self, q):
        q = np.asarray(q, dtype=float)
        if self._gradient is None:
            return fd_gradient(self._value, q)
        return self._gradient(q)

    def hessian(self, q):
        q = np.asarray(q, dtype=float)
        if self._hessian is None:
            return fd_jacobian(self.gradient, q, FD_STEP_SECOND)
        return self._hessian(q)

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


class FreePotential(Potential):
    """``V = 0``."""

    def __init__(self):
        super().__init__(None, name="free")

    def value(self, q):
        return np.zeros(np.shape(q)[:-1])

    def gradient(self, q):
        return np.zeros(np.shape(q))

    def hessian(self, q):
        shape = np.shape(q)
        return np.zeros(shape + shape[-1:])


class HarmonicPotential(Potential):
    """Isotropic ``V = k |q|^2 / 2``."""

    def __init__(self, k: float = 1.0):
        super().__init__(None, name="harmonic")
        self.k = float(k)

    def value(self, q):
        q = np.asarray(q, dtype=float)
        return 0.5 * self.k * np.einsum("...i,...i->...", q, q)

    def gradient(self, q):
        return self.k * np.asarray(q, dtype=float)

    def hessian(self, q):
        shape = np.shape(q)
        return np.broadcast_to(self.k * np.eye(shape[-1]), shape + shape[-1:]).copy()

    def __repr__(self):
        return f"HarmonicPotential(k={self.k})"


class PolynomialPotential(Potential):
    """Separable polynomial ``V(q) = sum_i sum_k c_k q_i^k``."""

    def __init__(self, coeffs):
        super().__init__(None, name="polynomial")
        self.coeffs = np.asarray(coeffs, dtype=float)
        if self.coeffs.ndim != 1 or self.coeffs.size == 0:
            raise ValueError("coeffs must be a non-empty 1-D sequence")
        p = np.polynomial.Polynomial(self.coeffs)
        self._p, self._dp, self._ddp = p, p.deriv(1), p.deriv(2)

    def value(self, q):
        # constant term counts once per coordinate, consistent with the separable form
        return np.sum(self._p(np.asarray(q, dtype=float)), axis=-1)

    def gradient(self, q):
        return self._dp(np.asarray(q, dtype=float))

    def hessian(self, q):
        q = np.asarray(q, dtype=float)
        d = self._ddp(q)
        return d[..., :, None] * np.eye(q.shape[-1])

    def __repr__(self):
        return f"PolynomialPotential({self.coeffs.tolist()})"


def make_potential(kind: str, **params) -> Potential:
    """Build a bundled potential by name: ``free``, ``harmonic`` (``k``) or ``polynomial`` (``coeffs``)."""
    if kind == "free":
        return FreePotential(**params)
    if kind == "harmonic":
        return HarmonicPotential(**params)
    if kind == "polynomial":
        return PolynomialPotential(**params)
    raise ValueError(f"unknown potential kind {kind!r}")


# -- Lagrangians ----------------------------------------------------------------------

class LagrangianModel:
    """Evaluator bundle for a contact Lagrangian ``L(q, v, z)`` on ``TQ x R``.

    Parameters
    ----------
    dim : int
        Dimension ``n`` of the configuration space.
    lagrangian : callable
        ``L(q, v, z)``; must broadcast over leading axes.
    dL_dq, dL_dv, dL_dz, d2L_dvdv, d2L_dvdq, d2L_dvdz : callable, optional
        Analytic partials. Missing ones are computed by central finite differences.
        Matrix conventions: ``d2L_dvdv[..., i, j] = d^2 L / dv_i dv_j`` and
        ``d2L_dvdq[..., i, j] = d^2 L / dv_i dq_j``.
    """

    def __init__(self, dim: int, lagrangian: Optional[Callable] = None, *,
                 dL_dq=None, dL_dv=None, dL_dz=None,
                 d2L_dvdv=None, d2L_dvdq=None, d2L_dvdz=None):
        if int(dim) < 1:
            raise DimensionError("dim must be a positive integer")
        self.dim = int(dim)
        self._L = lagrangian
        self._dL_dq = dL_dq
        self._dL_dv = dL_dv
        self._dL_dz = dL_dz
        self._d2L_dvdv = d2L_dvdv
        self._d2L_dvdq = d2L_dvdq
        self._d2L_dvdz = d2L_dvdz

    def L(self, q, v, z):
        return self._L(q, v, z)

    def dL_dq(self, q, v, z):
        if self._dL_dq is not None:
            return self._dL_dq(q, v, z)
        return fd_gradient(lambda x: self.L(x, v, z), q)

    def dL_dv(self, q, v, z):
        if self._dL_dv is not None:
            return self._dL_dv(q, v, z)
        return fd_gradient(lambda x: self.L(q, x, z), v)

    def dL_dz(self, q, v, z):
        if self._dL_dz is not None:
            return self._dL_dz(q, v, z)
        return fd_scalar(lambda x: self.L(q, v, x), z)

    def d2L_dvdv(self, q, v, z):
        if self._d2L_dvdv is not None:
            return self._d2L_dvdv(q, v, z)
        return fd_jacobian(lambda x: self.dL_dv(q, x, z), v, FD_STEP_SECOND)

    def d2L_dvdq(self, q, v, z):
        if self._d2L_dvdq is not None:
            return self._d2L_dvdq(q, v, z)
        return fd_jacobian(lambda x: self.dL_dv(x, v, z), q, FD_STEP_SECOND)

    def d2L_dvdz(self, q, v, z):
        if self._d2L_dvdz is not None:
            return self._d2L_dvdz(q, v, z)
        return fd_scalar(lambda x: self.dL_dv(q, v, x), z, FD_STEP_SECOND)

    def acceleration(self, q, v, z):
        """Solve the Herglotz equations for ``dv/dt``.

        ``W dv = dL/dq + (dL/dv)(dL/dz) - (d2L/dvdq) v - (d2L/dvdz) L``, obtained from
        ``d/dt dL/dv - dL/dq = (dL/dv)(dL/dz)`` by the chain rule with ``dz/dt = L``.
        """
        q = np.asarray(q, dtype=float)
        v = np.asarray(v, dtype=float)
        z = np.asarray(z, dtype=float)
        W = np.asarray(self.d2L_dvdv(q, v, z), dtype=float)
        cond = np.linalg.cond(W)
        if not np.all(np.isfinite(cond)) or np.any(cond > SINGULAR_COND):
            raise RegularityError(
                f"velocity Hessian is singular (condition number {np.max(cond):.3e})",
                state=(q.copy(), v.copy(), z.copy()),
            )
        Lval = np.asarray(self.L(q, v, z))
        rhs = (self.dL_dq(q, v, z)
               + self.dL_dv(q, v, z) * np.asarray(self.dL_dz(q, v, z))[..., None]
               - np.einsum("...ij,...j->...i", self.d2L_dvdq(q, v, z), v)
               - self.d2L_dvdz(q, v, z) * Lval[..., None])
        return np.linalg.solve(W, rhs[..., None])[..., 0]

    def flow_rhs(self, q, v, z):
        """``(dv/dt, L, dL/dz)`` in one call; the flow integrator evaluates this at every stage."""
        return self.acceleration(q, v, z), np.asarray(self.L(q, v, z)), np.asarray(self.dL_dz(q, v, z))

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class MechanicalLagrangian(LagrangianModel):
    """``L = |v|^2 / 2 - V(q) + gamma z`` with euclidean metric.

    Any real ``gamma`` is accepted; ``gamma < 0`` gives dissipation.
    """

    def __init__(self, dim: int, gamma: float, potential: Optional[Potential] = None):
        super().__init__(dim)
        self.gamma = float(gamma)
        self.potential = potential if potential is not None else FreePotential()

    def L(self, q, v, z):
        v = np.asarray(v, dtype=float)
        return 0.5 * np.sum(v * v, axis=-1) - self.potential.value(q) + self.gamma * np.asarray(z, dtype=float)

    def dL_dq(self, q, v, z):
        return -np.asarray(self.potential.gradient(q), dtype=float)

    def dL_dv(self, q, v, z):
        return np.array(v, dtype=float)

    def dL_dz(self, q, v, z):
        return np.full(np.shape(z), self.gamma)

    def d2L_dvdv(self, q, v, z):
        shape = np.shape(v)
        return np.broadcast_to(np.eye(self.dim), shape + shape[-1:]).copy()

    def d2L_dvdq(self, q, v, z):
        shape = np.shape(v)
        return np.zeros(shape + shape[-1:])

    def d2L_dvdz(self, q, v, z):
        return np.zeros(np.shape(v))

    def acceleration(self, q, v, z):
        return -np.asarray(self.potential.gradient(q), dtype=float) + self.gamma * np.asarray(v, dtype=float)

    def flow_rhs(self, q, v, z):
        pot = self.potential
        g = self.gamma
        return (g * v - pot.gradient(q),
                0.5 * np.einsum("...i,...i->...", v, v) - pot.value(q) + g * z,
                g)

    def __repr__(self):
        return f"MechanicalLagrangian(dim={self.dim}, gamma={self.gamma}, potential={self.potential!r})"


def free_particle(gamma: float, dim: int = 1) -> MechanicalLagrangian:
    return MechanicalLagrangian(dim, gamma, FreePotential())


def harmonic_oscillator(gamma: float, k: float = 1.0, dim: int = 1) -> MechanicalLagrangian:
    return MechanicalLagrangian(dim, gamma, HarmonicPotential(k))


class DiscreteLagrangian:
    """Evaluator bundle for a discrete Lagrangian ``L_d(q0, q1, z0)`` on ``Q x Q x R``.

    Subclasses override the methods; the constructor also accepts plain callables.
    Missing first derivatives come from finite differences of ``value``.

    The optional second derivatives ``d1_q1`` (``d(D_1 L_d)_i / d(q1)_j``) and ``dz_q1``
    (``d(D_z L_d) / d(q1)_j``) return ``None`` when unavailable; the Newton solvers then
    fall back to finite differences of the residual.

    ``h`` is the time step the Lagrangian discretizes, or ``None`` if it has none.
    """

    def __init__(self, dim: int, value: Optional[Callable] = None, *, d1=None, d2=None, dz=None,
                 d1_q1=None, dz_q1=None, h: Optional[float] = None):
        if int(dim) < 1:
            raise DimensionError("dim must be a positive integer")
        self.dim = int(dim)
        self.h = None if h is None else float(h)
        self._value = value
        self._d1 = d1
        self._d2 = d2
        self._dz = dz
        self._d1_q1 = d1_q1
        self._dz_q1 = dz_q1

    def value(self, q0, q1, z0) -> float:
        return float(self._value(q0, q1, z0))

    def d1(self, q0, q1, z0) -> np.ndarray:
        if self._d1 is not None:
            return np.asarray(self._d1(q0, q1, z0), dtype=float)
        return fd_gradient(lambda x: self._value(x, q1, z0), np.asarray(q0, dtype=float))

    def d2(self, q0, q1, z0) -> np.ndarray:
        if self._d2 is not None:
            return np.asarray(self._d2(q0, q1, z0), dtype=float)
        return fd_gradient(lambda x: self._value(q0, x, z0), np.asarray(q1, dtype=float))

    def dz(self, q0, q1, z0) -> float:
        if self._dz is not None:
            return float(self._dz(q0, q1, z0))
        return float(fd_scalar(lambda x: self._value(q0, q1, x), z0))

    def d1_q1(self, q0, q1, z0):
        return None if self._d1_q1 is None else np.asarray(self._d1_q1(q0, q1, z0), dtype=float)

    def dz_q1(self, q0, q1, z0):
        return None if self._dz_q1 is None else np.asarray(self._dz_q1(q0, q1, z0), dtype=float)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, h={self.h})"


# -- operations -----------------------------------------------------------------------

def _check_dim(model, dim: int):
    if model.dim != dim:
        raise DimensionError(f"state has dimension {dim}, model expects {model.dim}")


def eval_lagrangian(model: LagrangianModel, s: ContinuousState) -> float:
    """Value of ``L`` at ``s``."""
    _check_dim(model, s.dim)
    return float(model.L(s.q, s.v, s.z))


def energy(model: LagrangianModel, s: ContinuousState) -> float:
    """Energy ``E_L = v . dL/dv - L``."""
    _check_dim(model, s.dim)
    return float(np.dot(s.v, model.dL_dv(s.q, s.v, s.z)) - model.L(s.q, s.v, s.z))


def legendre(model: LagrangianModel, s: ContinuousState) -> CotangentState:
    """Fibre derivative ``(q, v, z) -> (q, dL/dv, z)``."""
    _check_dim(model, s.dim)
    return CotangentState(s.q, model.dL_dv(s.q, s.v, s.z), s.z)


def hamiltonian(model: MechanicalLagrangian, c: CotangentState) -> float:
    """Contact Hamiltonian ``H = |p|^2 / 2 + V(q) - gamma z`` of a mechanical Lagrangian."""
    if not isinstance(model, MechanicalLagrangian):
        raise TypeError("hamiltonian needs a MechanicalLagrangian (closed-form inverse Legendre map)")
    _check_dim(model, c.dim)
    return float(0.5 * np.dot(c.p, c.p) + model.potential.value(c.q) - model.gamma * c.z)

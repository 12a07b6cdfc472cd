"""Dense Newton iteration for the small nonlinear systems solved at every step."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConvergenceError


@dataclass(frozen=True)
class NewtonConfig:
    """Stopping rule ``||r||_inf <= abs_tol + rel_tol * scale`` and FD Jacobian step."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    max_iters: int = 50
    fd_step_scale: float = 1e-6

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0 and self.fd_step_scale > 0):
            raise ValueError("tolerances and fd_step_scale must be positive")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be at least 1")

    def tolerance(self, scale: float) -> float:
        return self.abs_tol + self.rel_tol * scale


def fd_jacobian_of(residual: Callable, x: np.ndarray, r0: Optional[np.ndarray],
                   fd_step_scale: float) -> np.ndarray:
    """Central-difference Jacobian of ``residual`` with per-coordinate step ``fd_step_scale*(1+|x_j|)``."""
    n = x.size
    m = np.size(r0) if r0 is not None else np.size(residual(x))
    J = np.empty((m, n))
    for j in range(n):
        dx = fd_step_scale * (1.0 + abs(x[j]))
        xp = x.copy()
        xm = x.copy()
        xp[j] += dx
        xm[j] -= dx
        J[:, j] = (residual(xp) - residual(xm)) / (xp[j] - xm[j])
    return J


def newton_solve(residual: Callable, x0, cfg: NewtonConfig, *, jacobian: Optional[Callable] = None,
                 scale: Callable | float = 1.0, error=ConvergenceError, what: str = "Newton solve"):
    """Solve ``residual(x) = 0`` starting from ``x0``.

    ``jacobian(x)`` is used when given, otherwise central finite differences.
    ``scale`` (number or callable of ``x``) enters the relative part of the tolerance.
    Returns ``(x, iterations)``; raises ``error`` carrying the last iterate and residual.
    """
    x = np.array(x0, dtype=float, ndmin=1)
    r = np.asarray(residual(x), dtype=float)
    for it in range(int(cfg.max_iters) + 1):
        sc = scale(x) if callable(scale) else scale
        if np.all(np.isfinite(r)) and np.max(np.abs(r)) <= cfg.tolerance(sc):
            return x, it
        if it == cfg.max_iters or not np.all(np.isfinite(r)):
            break
        J = jacobian(x) if jacobian is not None else fd_jacobian_of(residual, x, r, cfg.fd_step_scale)
        try:
            dx = np.linalg.solve(J, r)
        except np.linalg.LinAlgError as exc:
            raise error(f"{what}: singular Jacobian at iteration {it}", iterate=x, residual=r,
                        iterations=it) from exc
        x = x - dx
        r = np.asarray(residual(x), dtype=float)
    raise error(
        f"{what} did not converge in {cfg.max_iters} iterations (|r|_inf = {np.max(np.abs(r)):.3e})",
        iterate=x, residual=r, iterations=int(cfg.max_iters),
    )

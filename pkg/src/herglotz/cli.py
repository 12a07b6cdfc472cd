"""Command-line front end.

    herglotz simulate bundled:harmonic -o harmonic.csv
    herglotz verify bundled:free_particle --seed 7
    herglotz --jobs 4 converge bundled:harmonic --h-list 0.2,0.1,0.05,0.025
    herglotz exact-compare bundled:harmonic -o compare.csv

Exit codes: 0 success, 1 verification tolerance violated, 2 bad config or usage,
3 solver failure (partial CSV kept, terminated by a ``# error`` line).
"""
from __future__ import annotations

import argparse
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from typing import List, Optional, Sequence

import numpy as np

from .config import ScenarioConfig, bundled_names, load_config
from .continuous import flow_samples
from .core import ContinuousState, DiscreteState, hamiltonian, legendre
from .discrete import legendre_minus, rollout, sigma_d, step
from .discretize import shoot
from .errors import ConfigError, HerglotzError, RolloutError, SymmetryError
from .geometry import (DEFAULT_SEED, conformal_residual_minus, conformal_residual_plus, eta_minus, eta_plus,
                       hamiltonian_conformal_residual, pullback_residual, random_cotangents, random_states)
from .symmetry import dissipation_residual, invariance_residual, rotation, translation

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3


def fmt(x) -> str:
    return "" if x is None else "%.17g" % x


def log_or_none(H: float):
    return math.log(H) if H > 0 else None


class PartialRun(Exception):
    """Solver failure after ``rows`` were produced."""

    def __init__(self, rows, cause):
        super().__init__(str(cause))
        self.rows = rows
        self.cause = cause


# -- row producers ---------------------------------------------------------------------

def discrete_rows(cfg: ScenarioConfig) -> List[dict]:
    """One dict per discrete state ``x_0..x_N``; raises ``PartialRun`` on solver failure."""
    model = cfg.model()
    Ld = cfg.discrete_lagrangian()
    x = cfg.initial_state()
    rows = []
    try:
        for k in range(cfg.steps + 1):
            c = legendre_minus(Ld, x)
            H = hamiltonian(model, c)
            rows.append({"t": k * cfg.h, "q": x.q0, "z": x.z0, "p": c.p, "H": H,
                         "logH": log_or_none(H), "sigma_d": sigma_d(Ld, x)})
            if k < cfg.steps:
                x = step(Ld, x, cfg.newton)
    except HerglotzError as exc:
        raise PartialRun(rows, RolloutError(f"step {len(rows)}: {exc}", index=len(rows), cause=exc)) from exc
    return rows


def exact_samples(cfg: ScenarioConfig, h: Optional[float] = None, count: Optional[int] = None):
    """Continuous flow through ``(q0, q1, z0)``: shoot ``v0`` over the config step, then sample every ``h``."""
    model = cfg.model()
    seg = shoot(model, cfg.h, cfg.initial_state(), cfg.shooting())
    s0 = ContinuousState(np.array(cfg.q0), seg.v0, cfg.z0)
    h = cfg.h if h is None else h
    return flow_samples(model, s0, h, cfg.steps if count is None else count, cfg.flow)


def column_names(cfg: ScenarioConfig) -> List[str]:
    names = []
    for f in cfg.fields:
        if f in ("q", "p"):
            names += [f"{f}_{i}" for i in range(cfg.dim)]
        else:
            names.append(f)
    return names


def row_cells(cfg: ScenarioConfig, row: dict) -> List[str]:
    cells = []
    for f in cfg.fields:
        v = row[f]
        if f in ("q", "p"):
            cells += [fmt(c) for c in v]
        else:
            cells.append(fmt(v))
    return cells


# -- output ----------------------------------------------------------------------------

@contextmanager
def _sink(path: Optional[str]):
    if path is None or path == "-":
        buf = io.StringIO()
        yield buf
        sys.stdout.write(buf.getvalue())
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _write_csv(path, header, body, error=None):
    with _sink(path) as out:
        out.write(",".join(header) + "\n")
        for cells in body:
            out.write(",".join(cells) + "\n")
        if error is not None:
            out.write("# error: " + " ".join(str(error).split()) + "\n")


def _fail(msg: str, code: int) -> int:
    print(f"herglotz: {msg}", file=sys.stderr)
    return code


# -- commands --------------------------------------------------------------------------

def cmd_simulate(cfg: ScenarioConfig, out: Optional[str]) -> int:
    path = out if out is not None else cfg.output_path
    header = column_names(cfg)
    try:
        rows = discrete_rows(cfg)
    except PartialRun as exc:
        _write_csv(path, header, [row_cells(cfg, r) for r in exc.rows], exc.cause)
        return _fail(f"solver failure: {exc.cause}", EXIT_SOLVER)
    _write_csv(path, header, [row_cells(cfg, r) for r in rows])
    return EXIT_OK


def cmd_exact_compare(cfg: ScenarioConfig, out: Optional[str]) -> int:
    """Integrator rows next to the exact flow sampled at the same times."""
    path = out if out is not None else cfg.output_path
    n = cfg.dim
    header = (["t"] + [f"q_{i}" for i in range(n)] + [f"q_exact_{i}" for i in range(n)]
              + ["z", "z_exact", "H", "H_exact", "logH", "logH_exact", "sigma_d"])
    model = cfg.model()
    try:
        exact = exact_samples(cfg)
    except HerglotzError as exc:
        _write_csv(path, header, [], exc)
        return _fail(f"solver failure computing the exact flow: {exc}", EXIT_SOLVER)
    error = None
    try:
        rows = discrete_rows(cfg)
    except PartialRun as exc:
        rows, error = exc.rows, exc.cause
    body = []
    for r, s in zip(rows, exact):
        He = hamiltonian(model, legendre(model, s))
        body.append([fmt(r["t"])] + [fmt(c) for c in r["q"]] + [fmt(c) for c in s.q]
                    + [fmt(r["z"]), fmt(s.z), fmt(r["H"]), fmt(He), fmt(r["logH"]), fmt(log_or_none(He)),
                       fmt(r["sigma_d"])])
    _write_csv(path, header, body, error)
    if error is not None:
        return _fail(f"solver failure: {error}", EXIT_SOLVER)
    return EXIT_OK


def _generators(dim: int):
    gens = [translation(dim, np.eye(dim)[i]) for i in range(dim)]
    if dim >= 2:
        gens += [rotation(dim, i, j) for i in range(dim) for j in range(i + 1, dim)]
    return gens


def verify_report(cfg: ScenarioConfig, seed: int = DEFAULT_SEED, points: int = 100) -> List[tuple]:
    """``(check, max residual or None if not applicable)`` for the geometric and Noether suites."""
    Ld = cfg.discrete_lagrangian()
    newton = cfg.newton
    states = random_states(points, cfg.dim, seed)
    covecs = random_cotangents(points, cfg.dim, seed)
    report = []
    x0 = cfg.initial_state()
    eta_res = 0.0
    for x in states + [x0]:
        diff = eta_plus(Ld, x).as_vector() - sigma_d(Ld, x) * eta_minus(Ld, x).as_vector()
        eta_res = max(eta_res, float(np.max(np.abs(diff))))
    report.append(("eta_plus_vs_sigma_eta_minus", eta_res))
    for name, fn in (("conformal_minus", conformal_residual_minus), ("conformal_plus", conformal_residual_plus),
                     ("pullback_eta_minus", pullback_residual)):
        report.append((name, max(fn(Ld, x, newton) for x in states)))
    report.append(("hamiltonian_conformal",
                   max(hamiltonian_conformal_residual(Ld, c, newton) for c in covecs)))
    for gen in _generators(cfg.dim):
        try:
            if abs(invariance_residual(Ld, x0, gen)) > 1e-10:
                raise SymmetryError("not invariant at x0")
            res = dissipation_residual(Ld, x0, cfg.steps, gen, newton)
        except SymmetryError:
            res = None
        report.append((f"dissipation[{gen.name}]", res))
    return report


def cmd_verify(cfg: ScenarioConfig, seed: int, tol: float, points: int) -> int:
    try:
        report = verify_report(cfg, seed, points)
    except HerglotzError as exc:
        return _fail(f"solver failure: {exc}", EXIT_SOLVER)
    ok = True
    for name, value in report:
        if value is None:
            print(f"{name:40s} n/a (not a symmetry of L_d)")
            continue
        passed = value <= tol
        ok &= passed
        print(f"{name:40s} {value:.3e}  {'ok' if passed else 'FAIL'} (tol {tol:g})")
    print("verify: " + ("passed" if ok else "FAILED"))
    return EXIT_OK if ok else EXIT_VERIFY


def converge_error(cfg: ScenarioConfig, h: float, horizon: float, v0) -> float:
    """Max ``|q_k - q(kh)|`` over ``kh <= horizon`` for the discretization of ``cfg`` at step ``h``."""
    model = cfg.model()
    N = int(round(horizon / h))
    ref = flow_samples(model, ContinuousState(np.array(cfg.q0), v0, cfg.z0), h, N + 1, cfg.flow)
    sub = cfg.with_h(h)
    Ld = sub.discrete_lagrangian()
    traj = rollout(Ld, DiscreteState(ref[0].q, ref[1].q, ref[0].z), N, cfg.newton)
    q_ref = np.array([s.q for s in ref[:N + 1]])
    return float(np.max(np.abs(traj.q[:N + 1] - q_ref)))


def observed_orders(hs: Sequence[float], errors: Sequence[float]) -> List[Optional[float]]:
    out = [None]
    for (h1, e1), (h2, e2) in zip(zip(hs, errors), zip(hs[1:], errors[1:])):
        out.append(math.log(e1 / e2) / math.log(h1 / h2) if e1 > 0 and e2 > 0 else None)
    return out


def cmd_converge(cfg: ScenarioConfig, h_list: Sequence[float], horizon: float, out: Optional[str], jobs: int) -> int:
    for h in h_list:
        if abs(horizon / h - round(horizon / h)) > 1e-9 * horizon / h:
            return _fail(f"horizon {horizon} is not a multiple of h = {h}", EXIT_CONFIG)
    try:
        v0 = shoot(cfg.model(), cfg.h, cfg.initial_state(), cfg.shooting()).v0
        args = [(cfg, h, horizon, v0) for h in h_list]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                errors = list(pool.map(_converge_star, args))
        else:
            errors = [_converge_star(a) for a in args]
    except HerglotzError as exc:
        return _fail(f"solver failure: {exc}", EXIT_SOLVER)
    orders = observed_orders(h_list, errors)
    _write_csv(out, ["h", "max_error", "order"],
               [[fmt(h), fmt(e), fmt(o)] for h, e, o in zip(h_list, errors, orders)])
    return EXIT_OK


def _converge_star(a):
    return converge_error(*a)


# -- argument parsing ------------------------------------------------------------------

def _h_list(text: str) -> List[float]:
    try:
        hs = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --h-list {text!r}") from None
    if len(hs) < 3 or any(not (h > 0 and math.isfinite(h)) for h in hs):
        raise argparse.ArgumentTypeError("--h-list needs at least three positive step sizes")
    return hs


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="herglotz", description="Discrete Herglotz integrator experiments.",
        epilog="Config paths may be files or bundled:NAME (" + ", ".join(bundled_names()) + ").")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes for h-sweeps (default 1)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="roll out the integrator and write a CSV")
    p.add_argument("config")
    p.add_argument("-o", "--output", default=None, help="CSV path ('-' for stdout)")

    p = sub.add_parser("verify", help="check conformal and dissipation identities numerically")
    p.add_argument("config")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--points", type=int, default=100, help="random points per check")

    p = sub.add_parser("converge", help="error against the exact flow for several step sizes")
    p.add_argument("config")
    p.add_argument("--h-list", type=_h_list, required=True)
    p.add_argument("--horizon", type=float, default=2.0)
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("exact-compare", help="integrator next to the sampled exact flow")
    p.add_argument("config")
    p.add_argument("-o", "--output", default=None)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        return _fail("--jobs must be >= 1", EXIT_CONFIG)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_CONFIG)
    if args.command == "simulate":
        return cmd_simulate(cfg, args.output)
    if args.command == "verify":
        if args.points < 1 or not args.tol > 0:
            return _fail("--points must be >= 1 and --tol positive", EXIT_CONFIG)
        return cmd_verify(cfg, args.seed, args.tol, args.points)
    if args.command == "converge":
        if not args.horizon > 0:
            return _fail("--horizon must be positive", EXIT_CONFIG)
        return cmd_converge(cfg, args.h_list, args.horizon, args.output, args.jobs)
    return cmd_exact_compare(cfg, args.output)


if __name__ == "__main__":
    sys.exit(main())

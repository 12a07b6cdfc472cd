"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected and repeated in the terminal summary.
"""
import math
import subprocess
import sys

import numpy as np

from herglotz import (ContinuousState, DiscreteState, dissipation_residual, exact_discrete, flow_samples,
                      free_particle, free_particle_exact, hamiltonian, harmonic_oscillator, legendre,
                      midpoint_discrete, momentum_series, rollout, shoot, step, translation)
from herglotz.geometry import (conformal_residual_minus, conformal_residual_plus, hamiltonian_conformal_residual,
                               random_cotangents, random_states)

import conftest
import oracles

G, H = -0.05, 0.5
E = math.exp(G * H)
X0 = DiscreteState([0.0], [1.0], 0.0)


def record(n, title, checks):
    """``checks``: list of ``(label, measured, tol)``; passes when every ``measured <= tol``."""
    passed = all(m <= tol for _, m, tol in checks)
    detail = ", ".join(f"{label} {m:.3g} (tol {tol:g})" for label, m, tol in checks)
    conftest.ACCEPTANCE[n] = (title, passed, detail)
    print(f"[{'PASS' if passed else 'FAIL'}] criterion {n}: {title}: {detail}")
    assert passed, detail


def test_criterion_1_free_particle_golden_series():
    traj = rollout(midpoint_discrete(free_particle(G), H), X0, 10)
    eq = np.max(np.abs(traj.q[:12, 0] - oracles.FREE_Q[:12]))
    ez = np.max(np.abs(traj.z[:11] - oracles.FREE_Z[:11]))
    record(1, "free-particle golden series", [("max |dq|", eq, 1e-9), ("max |dz|", ez, 1e-9)])


def test_criterion_2_oscillator_golden_step():
    Ld = midpoint_discrete(harmonic_oscillator(G), H)
    y = step(Ld, X0)
    qo, zo = oracles.oscillator_midpoint_series(50)
    traj = rollout(Ld, X0, 50)
    record(2, "oscillator golden step", [
        ("|q2 - 1.74264705882353|", abs(y.q1[0] - 1.74264705882353), 1e-10),
        ("|z1 - 0.9375|", abs(y.z0 - 0.9375), 0.0),
        ("50-step |dq|", np.max(np.abs(traj.q[:, 0] - np.array(qo, float))), 1e-10),
        ("50-step |dz|", np.max(np.abs(traj.z - np.array(zo, float))), 1e-10),
    ])


def test_criterion_3_conformal_contact_property():
    systems = {
        "free": midpoint_discrete(free_particle(G), H),
        "osc": midpoint_discrete(harmonic_oscillator(G), H),
        "free-exact": free_particle_exact(G, H),
    }
    states = random_states(100, 1)
    cotangents = random_cotangents(100, 1)
    checks = []
    for name, Ld in systems.items():
        checks.append((f"{name} minus", max(conformal_residual_minus(Ld, x) for x in states), 1e-5))
        checks.append((f"{name} plus", max(conformal_residual_plus(Ld, x) for x in states), 1e-5))
        checks.append((f"{name} hamiltonian", max(hamiltonian_conformal_residual(Ld, c) for c in cotangents), 1e-5))
    record(3, "conformal contact property", checks)


def test_criterion_4_discrete_dissipation_law():
    gen = translation(1)
    res = dissipation_residual(midpoint_discrete(free_particle(G), H), X0, 50, gen)
    cons = midpoint_discrete(free_particle(0.0), H)
    J = momentum_series(cons, rollout(cons, X0, 50), gen)
    record(4, "discrete dissipation law", [("max |J' - sigma J|", res, 1e-10),
                                           ("gamma=0 spread of J", float(np.ptp(J)), 1e-12)])


def test_criterion_5_exact_lagrangian_cross_check():
    model = free_particle(G)
    shooting = exact_discrete(model, H)
    closed = free_particle_exact(G, H)
    rng = np.random.default_rng(5)
    dv = dd1 = dd2 = ddz = 0.0
    for q0, q1, z0 in rng.uniform(-2.0, 2.0, (50, 3)):
        a, b = [q0], [q1]
        dv = max(dv, abs(shooting.value(a, b, z0) - oracles.free_exact_action(q0, q1, z0, H, G)),
                 abs(shooting.value(a, b, z0) - closed.value(a, b, z0)))
        # dL/dv = v, so D1 = -v0 e^{gamma h}, D2 = v(h) and D_z = e^{gamma h} - 1
        v0 = oracles.free_particle_v0(q0, q1, H, G)
        v_end = oracles.free_particle_solution(H, q0, v0, z0, G)[1]
        dd1 = max(dd1, abs(shooting.d1(a, b, z0)[0] + v0 * E))
        dd2 = max(dd2, abs(shooting.d2(a, b, z0)[0] - v_end))
        ddz = max(ddz, abs(shooting.dz(a, b, z0) - (E - 1.0)))
    record(5, "exact discrete Lagrangian cross-check", [
        ("|L_h^e - closed form|", dv, 1e-8), ("|D1 err|", dd1, 1e-6),
        ("|D2 err|", dd2, 1e-6), ("|Dz err|", ddz, 1e-6),
    ])


def _exact_rollout_error(model, q1_ref):
    """Rollout with the shooting Lagrangian against flow samples and an independent closed form."""
    N = 20
    v0 = shoot(model, H, X0).v0
    samples = flow_samples(model, ContinuousState([0.0], v0, 0.0), H, N)
    traj = rollout(exact_discrete(model, H), DiscreteState([0.0], samples[1].q, 0.0), N)
    q_flow = np.array([s.q[0] for s in samples[:N + 1]])
    z_flow = np.array([s.z for s in samples[:N + 1]])
    e_flow = max(np.max(np.abs(traj.q[:N + 1, 0] - q_flow)), np.max(np.abs(traj.z - z_flow)))
    q_ref, z_ref = q1_ref(v0[0], np.arange(N + 1) * H)
    e_ref = max(np.max(np.abs(traj.q[:N + 1, 0] - q_ref)), np.max(np.abs(traj.z - z_ref)))
    return e_flow, e_ref


def test_criterion_6_exactness_theorem():
    def free_ref(v0, ts):
        sol = np.array([oracles.free_particle_solution(t, 0.0, v0, 0.0, G) for t in ts])
        return sol[:, 0], sol[:, 2]

    def osc_ref(v0, ts):
        q = np.array([oracles.oscillator_solution(t, 0.0, v0, G)[0] for t in ts])
        z = np.array([oracles.oscillator_z(t, 0.0, v0, 0.0, G) for t in ts])
        return q, z

    fe, fr = _exact_rollout_error(free_particle(G), free_ref)
    oe, orr = _exact_rollout_error(harmonic_oscillator(G), osc_ref)
    record(6, "exactness theorem (k <= 20)", [
        ("free vs flow", fe, 1e-6), ("free vs closed form", fr, 1e-6),
        ("osc vs flow", oe, 1e-6), ("osc vs closed form", orr, 1e-6),
    ])


def test_criterion_7_continuous_decay_law():
    model = harmonic_oscillator(G)
    v0 = shoot(model, H, X0).v0
    samples = flow_samples(model, ContinuousState([0.0], v0, 0.0), H, 48)
    t = H * np.arange(len(samples))
    logH = np.log([hamiltonian(model, legendre(model, s)) for s in samples])
    assert t[-1] == 24.0
    slope = np.polyfit(t, logH, 1)[0]
    record(7, "continuous decay law over [0, 24]", [("|slope - gamma|", abs(slope - G), 1e-3)])


def test_criterion_8_convergence_order():
    model = harmonic_oscillator(G)
    v0 = oracles.oscillator_v0(0.0, 1.0, H, G)
    hs = [0.2, 0.1, 0.05, 0.025]
    horizon = 2.0
    errors = []
    for h in hs:
        N = int(round(horizon / h))
        q_ref = np.array([oracles.oscillator_solution(k * h, 0.0, v0, G)[0] for k in range(N + 1)])
        traj = rollout(midpoint_discrete(model, h), DiscreteState([0.0], [q_ref[1]], 0.0), N)
        errors.append(np.max(np.abs(traj.q[:N + 1, 0] - q_ref)))
    orders = [math.log(e1 / e2) / math.log(h1 / h2) for h1, h2, e1, e2 in zip(hs, hs[1:], errors, errors[1:])]
    record(8, "convergence order", [(f"|order - 2| at h={h2}", abs(p - 2.0), 0.3)
                                    for h2, p in zip(hs[1:], orders)])


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "herglotz", *args], capture_output=True)


def test_criterion_9_cli_contract():
    checks = []
    for name in ("free_particle", "harmonic"):
        a, b = _cli("simulate", f"bundled:{name}"), _cli("simulate", f"bundled:{name}")
        same = a.returncode == 0 and a.stdout == b.stdout and len(a.stdout) > 0
        checks.append((f"{name} reruns differ", 0.0 if same else 1.0, 0.0))
    bad = _cli("simulate", "bundled:degenerate")
    checks.append(("degenerate exit code != 3", float(bad.returncode != 3), 0.0))
    checks.append(("no sigma_d diagnostic", float(b"sigma_d" not in bad.stderr), 0.0))
    record(9, "CLI contract", checks)

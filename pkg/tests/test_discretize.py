import math

import numpy as np
import pytest

from herglotz import (DiscreteState, LagrangianModel, MechanicalLagrangian, PolynomialPotential, ShootingConfig, exact_discrete,
                      exact_retraction, exact_retraction_plus, free_particle, free_particle_exact,
                      harmonic_oscillator, midpoint_discrete, rollout, shoot, sigma_d, step)
from herglotz.errors import ShootingError
from herglotz.newton import NewtonConfig

import oracles

G, H = -0.05, 0.5
X0 = DiscreteState([0.0], [1.0], 0.0)
E = math.exp(G * H)


def test_midpoint_partials_and_sigma():
    Ld = midpoint_discrete(harmonic_oscillator(G), H)
    assert Ld.d1(X0.q0, X0.q1, 0.0)[0] == -2.125
    assert Ld.d2(X0.q0, X0.q1, 0.0)[0] == 1.875
    for x in (X0, DiscreteState([3.0], [-1.0], 7.0)):
        assert sigma_d(midpoint_discrete(free_particle(G), H), x) == 0.975
    # analytic Newton Jacobian against finite differences of D_1
    q1 = np.array([0.8])
    fd = (Ld.d1(X0.q0, q1 + 1e-6, 0.2) - Ld.d1(X0.q0, q1 - 1e-6, 0.2)) / 2e-6
    assert Ld.d1_q1(X0.q0, q1, 0.2)[0, 0] == pytest.approx(fd[0], abs=1e-8)


def test_free_particle_exact_closed_form():
    Ld = free_particle_exact(G, H)
    assert abs(Ld.value(X0.q0, X0.q1, 0.0) - 0.9875521) <= 1e-6
    assert Ld.value(X0.q0, X0.q0, 0.0) == 0.0
    assert Ld.dz(X0.q0, X0.q1, 0.0) == pytest.approx(E - 1, abs=1e-16)
    assert abs(sigma_d(Ld, X0) - 0.9753099) <= 1e-7
    rng = np.random.default_rng(1)
    for _ in range(20):
        q0, q1, z0 = rng.uniform(-2, 2, 3)
        assert Ld.value([q0], [q1], z0) == pytest.approx(oracles.free_exact_action(q0, q1, z0, H, G), abs=1e-12)
    with pytest.raises(ValueError):
        free_particle_exact(0.0, H)


def test_shoot_free_particle_and_straight_line():
    seg = shoot(free_particle(G), H, X0)
    assert abs(seg.v0[0] - oracles.free_particle_v0(0.0, 1.0, H, G)) <= 1e-8
    # closed form gives 2.02510417; the rounded value 2.0251049 is only good to ~1e-6
    assert abs(seg.v0[0] - 2.0251049) <= 1e-6
    assert seg.b_h == pytest.approx(G * H, abs=1e-15)
    assert shoot(free_particle(0.0), H, X0).v0[0] == pytest.approx(2.0, abs=1e-12)


def test_shoot_oscillator_matches_boundary_solve():
    seg = shoot(harmonic_oscillator(G), H, X0)
    assert abs(seg.v0[0] - oracles.oscillator_v0(0.0, 1.0, H, G)) <= 1e-7
    x = DiscreteState([0.4], [-0.3], 0.2)
    assert abs(shoot(harmonic_oscillator(G), 0.3, x).v0[0] - oracles.oscillator_v0(0.4, -0.3, 0.3, G)) <= 1e-7


def test_exact_retractions():
    m = free_particle(G)
    r = exact_retraction(m, H, X0)
    v0 = oracles.free_particle_v0(0.0, 1.0, H, G)
    assert abs(r.v[0] - v0) <= 1e-8 and r.q[0] == 0.0
    end = exact_retraction_plus(m, H, X0)
    assert abs(end.q[0] - 1.0) <= 1e-12
    assert abs(end.v[0] - v0 * E) <= 1e-8
    assert abs(end.z - 0.9875521) <= 1e-7
    end = exact_retraction_plus(free_particle(0.0), H, X0)
    assert np.allclose([end.q[0], end.v[0], end.z], [1.0, 2.0, 1.0], atol=1e-12)
    end = exact_retraction_plus(m, H, DiscreteState([0.3], [0.3], 0.6))
    assert abs(end.v[0]) <= 1e-12 and end.z == pytest.approx(0.6 * E, abs=1e-12)


def test_exact_lagrangian_partials_at_reference_point():
    Ld = exact_discrete(free_particle(G), H)
    assert abs(Ld.value(X0.q0, X0.q1, 0.0) - 0.9875521) <= 1e-7
    p1 = oracles.free_particle_v0(0.0, 1.0, H, G) * E  # 1.97510417
    assert abs(Ld.d2(X0.q0, X0.q1, 0.0)[0] - p1) <= 1e-8
    assert abs(Ld.d1(X0.q0, X0.q1, 0.0)[0] + p1) <= 1e-8
    assert abs(Ld.dz(X0.q0, X0.q1, 0.0) + 0.0246901) <= 1e-7


def test_exact_lagrangian_second_derivatives_match_closed_form():
    cf = free_particle_exact(G, H)
    Ld = exact_discrete(free_particle(G), H)
    x = DiscreteState([0.2], [-0.5], 0.4)
    assert Ld.d1_q1(x.q0, x.q1, x.z0)[0, 0] == pytest.approx(cf.d1_q1(x.q0, x.q1, x.z0)[0, 0], abs=1e-6)
    assert np.allclose(Ld.dz_q1(x.q0, x.q1, x.z0), 0.0, atol=1e-12)


def test_exact_lagrangian_matches_closed_form_in_two_dimensions():
    cf = free_particle_exact(G, H, dim=2)
    Ld = exact_discrete(free_particle(G, dim=2), H)
    x = DiscreteState([0.2, -1.0], [1.1, 0.4], -0.3)
    assert Ld.value(x.q0, x.q1, x.z0) == pytest.approx(cf.value(x.q0, x.q1, x.z0), abs=1e-9)
    assert np.allclose(Ld.d1(x.q0, x.q1, x.z0), cf.d1(x.q0, x.q1, x.z0), atol=1e-8)


def test_exact_oscillator_step_follows_the_flow():
    Ld = exact_discrete(harmonic_oscillator(G), H)
    y = step(Ld, X0)
    assert abs(y.q1[0] - oracles.HARM_EXACT_Q[2]) <= 1e-9
    v0 = oracles.oscillator_v0(0.0, 1.0, H, G)
    assert abs(y.z0 - oracles.oscillator_z(H, 0.0, v0, 0.0, G)) <= 1e-9


def test_exact_polynomial_step_follows_the_flow():
    # nonlinear potential, generic b(h) path exercised through shooting
    model = MechanicalLagrangian(1, G, PolynomialPotential([0, 0, 0.5, 0, 0.25]))
    Ld = exact_discrete(model, 0.25)
    x = DiscreteState([0.1], [0.3], 0.0)
    traj = rollout(Ld, x, 3)
    v0 = shoot(model, 0.25, x).v0[0]
    for k in range(1, 4):
        ref = oracles.herglotz_ivp(0.25 * k, 0.1, v0, 0.0, G, lambda q: q + q**3)
        assert abs(traj.q[k, 0] - ref[0]) <= 1e-8 and abs(traj.z[k] - ref[2]) <= 1e-8


def test_shooting_failures_are_reported():
    w = math.sqrt(1 - G**2 / 4)
    quick = ShootingConfig(newton=NewtonConfig(abs_tol=1e-13, rel_tol=1e-13, max_iters=6))
    with pytest.raises(ShootingError):
        shoot(harmonic_oscillator(G), math.pi / w, X0, quick)
    model = MechanicalLagrangian(1, G, PolynomialPotential([0, 0, 0, 0, -0.25]))
    with pytest.raises(ShootingError):
        shoot(model, 3.0, DiscreteState([0.0], [40.0], 0.0))


def test_shooting_config_validation():
    with pytest.raises(ValueError):
        ShootingConfig(velocity_guess_mode="psychic")


def _position_coupled_model(c=0.1):
    # L = v^2/2 + gamma z (1 + c q^2): dL/dz depends on q, so b(h) is integrated along the flow
    return LagrangianModel(
        1, lambda q, v, z: 0.5 * np.sum(v * v, -1) + G * z * (1 + c * np.sum(q * q, -1)),
        dL_dq=lambda q, v, z: 2 * c * G * np.asarray(z)[..., None] * q,
        dL_dv=lambda q, v, z: v,
        dL_dz=lambda q, v, z: G * (1 + c * np.sum(q * q, -1)),
        d2L_dvdv=lambda q, v, z: np.broadcast_to(np.eye(1), np.shape(v)[:-1] + (1, 1)),
        d2L_dvdq=lambda q, v, z: np.zeros(np.shape(v)[:-1] + (1, 1)),
        d2L_dvdz=lambda q, v, z: np.zeros(np.shape(v)),
    )


def test_exact_lagrangian_for_z_coupled_model_samples_the_flow():
    from scipy.integrate import solve_ivp
    c, h = 0.1, 0.5
    model = _position_coupled_model(c)

    def rhs(_, y):
        q, v, z, b = y
        dz = G * (1 + c * q * q)
        return [v, 2 * c * G * z * q + v * dz, 0.5 * v * v + G * z * (1 + c * q * q), dz]

    x = DiscreteState([0.2], [-0.5], 0.4)
    seg = shoot(model, h, x)
    ref = solve_ivp(rhs, (0, 3 * h), [0.2, seg.v0[0], 0.4, 0.0], t_eval=[h, 2 * h, 3 * h],
                    rtol=1e-12, atol=1e-13, method="DOP853").y
    assert abs(ref[0, 0] + 0.5) <= 1e-9
    assert seg.b_h == pytest.approx(ref[3, 0], abs=1e-9)
    Ld = exact_discrete(model, h)
    assert Ld.dz(x.q0, x.q1, x.z0) == pytest.approx(math.exp(ref[3, 0]) - 1, abs=1e-9)
    traj = rollout(Ld, x, 2)
    assert np.allclose(traj.q[1:, 0], ref[0], atol=1e-8)
    assert np.allclose(traj.z[1:], ref[2, :2], atol=1e-8)


def test_noisy_generic_model_fails_fast_instead_of_spinning():
    fd_only = LagrangianModel(1, lambda q, v, z: 0.5 * np.sum(v * v, -1) + G * z)
    with pytest.raises(ShootingError, match="stalled"):
        shoot(fd_only, 0.5, DiscreteState([0.2], [-0.5], 0.4))
    loose = ShootingConfig(newton=NewtonConfig(abs_tol=1e-9, rel_tol=1e-9))
    assert abs(shoot(fd_only, 0.5, DiscreteState([0.2], [-0.5], 0.4), loose).v0[0]
               - oracles.free_particle_v0(0.2, -0.5, 0.5, G)) <= 1e-8

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from herglotz import (ContinuousState, CotangentState, DiscreteState, LagrangianModel, MechanicalLagrangian,
                      PolynomialPotential, energy, eval_lagrangian, free_particle, hamiltonian,
                      harmonic_oscillator, legendre)
from herglotz.core import fd_gradient, make_potential
from herglotz.errors import DimensionError, NonFiniteStateError, RegularityError

G = -0.05
finite = st.floats(-3, 3, allow_nan=False)


def S(q, v, z):
    return ContinuousState(np.atleast_1d(q), np.atleast_1d(v), z)


def test_states_validate_and_freeze():
    s = S([0.0, 1.0], [2.0, 3.0], 0.5)
    assert s.dim == 2
    with pytest.raises(ValueError):
        s.q[0] = 1.0
    with pytest.raises(DimensionError):
        S([0.0, 1.0], [2.0], 0.0)
    with pytest.raises(NonFiniteStateError):
        S([np.nan], [0.0], 0.0)
    with pytest.raises(NonFiniteStateError):
        DiscreteState([0.0], [1.0], np.inf)
    x = DiscreteState([0.0, 1.0], [2.0, 3.0], 4.0)
    assert DiscreteState.from_vector(x.as_vector()) == x
    assert x != DiscreteState([0.0, 1.0], [2.0, 3.0], 4.5)
    c = CotangentState.from_vector([1.0, 2.0, 3.0])
    assert (c.q[0], c.p[0], c.z) == (1.0, 2.0, 3.0)


def test_eval_lagrangian_examples():
    assert eval_lagrangian(free_particle(G), S(0, 2, 0)) == 2.0
    assert eval_lagrangian(harmonic_oscillator(G), S(0.5, 0, 0)) == -0.125
    assert eval_lagrangian(harmonic_oscillator(G), S(0, 0, 0)) == 0.0
    with pytest.raises(DimensionError):
        eval_lagrangian(free_particle(G, dim=2), S(0, 2, 0))


def test_energy_and_hamiltonian_examples():
    assert energy(free_particle(G), S(0, 2, 0)) == 2.0
    assert energy(harmonic_oscillator(G), S(1, 0, 0)) == 0.5
    assert energy(free_particle(G), S(0, 0, 0)) == 0.0
    fp = free_particle(G)
    assert hamiltonian(fp, CotangentState([0.0], [2.0], 0.0)) == 2.0
    assert hamiltonian(fp, CotangentState([0.0], [2.0], 1.0)) == pytest.approx(2.05, abs=1e-15)
    assert hamiltonian(fp, CotangentState([0.0], [0.0], 0.0)) == 0.0
    with pytest.raises(TypeError):
        hamiltonian(LagrangianModel(1, lambda q, v, z: 0.5 * v @ v), CotangentState([0.0], [1.0], 0.0))


def test_legendre_examples():
    c = legendre(free_particle(G), S(1, -3, 5))
    assert (c.q[0], c.p[0], c.z) == (1.0, -3.0, 5.0)
    heavy = LagrangianModel(1, lambda q, v, z: 0.5 * 4.0 * np.sum(v * v, axis=-1))
    assert legendre(heavy, S(0, 2, 0)).p[0] == pytest.approx(8.0, rel=1e-8)


def test_mechanical_hessian_is_identity():
    m = harmonic_oscillator(G, dim=3)
    W = m.d2L_dvdv(np.ones(3), np.zeros(3), 0.0)
    assert np.array_equal(W, np.eye(3))


@settings(max_examples=60, deadline=None)
@given(q=finite, v=finite, z=finite, k=st.floats(0.1, 4))
def test_hamiltonian_of_legendre_is_energy(q, v, z, k):
    m = harmonic_oscillator(G, k=k)
    s = S(q, v, z)
    assert hamiltonian(m, legendre(m, s)) == pytest.approx(energy(m, s), rel=1e-14, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(q=st.floats(-1, 1), v=st.floats(-1, 1), z=st.floats(-1, 1))
def test_analytic_partials_match_finite_differences(q, v, z):
    m = MechanicalLagrangian(1, G, PolynomialPotential([0.0, 0.3, 0.5, -0.2, 0.1]))
    qa, va = np.array([q]), np.array([v])
    L = lambda qq, vv, zz: m.L(qq, vv, zz)
    fd_q = fd_gradient(lambda x: L(x, va, z), qa)
    fd_v = fd_gradient(lambda x: L(qa, x, z), va)
    fd_z = (L(qa, va, z + 1e-5) - L(qa, va, z - 1e-5)) / 2e-5
    tol = lambda a: 1e-6 * max(1.0, abs(a))
    assert abs(m.dL_dq(qa, va, z)[0] - fd_q[0]) <= tol(fd_q[0])
    assert abs(m.dL_dv(qa, va, z)[0] - fd_v[0]) <= tol(fd_v[0])
    assert abs(m.dL_dz(qa, va, z) - fd_z) <= tol(fd_z)


def test_generic_model_fallbacks_agree_with_mechanical():
    mech = harmonic_oscillator(G, dim=2)
    gen = LagrangianModel(2, lambda q, v, z: 0.5 * np.sum(v * v, -1) - 0.5 * np.sum(q * q, -1) + G * z)
    q, v, z = np.array([0.3, -0.7]), np.array([1.1, 0.4]), 0.2
    for name in ("dL_dq", "dL_dv", "dL_dz", "d2L_dvdv", "d2L_dvdq", "d2L_dvdz"):
        assert np.allclose(getattr(gen, name)(q, v, z), getattr(mech, name)(q, v, z), atol=1e-6), name
    assert np.allclose(gen.acceleration(q, v, z), mech.acceleration(q, v, z), atol=1e-6)


def test_singular_velocity_hessian_raises_regularity_error():
    degenerate = LagrangianModel(1, lambda q, v, z: q[..., 0] * v[..., 0] + G * z)
    with pytest.raises(RegularityError) as info:
        degenerate.acceleration(np.array([1.0]), np.array([0.0]), 0.0)
    assert info.value.state is not None


def test_potentials():
    V = make_potential("harmonic", k=2.0)
    assert V.value(np.array([1.0, 1.0])) == 2.0
    assert np.array_equal(V.gradient(np.array([1.0, -1.0])), [2.0, -2.0])
    P = PolynomialPotential([1.0, 0.0, 1.0])  # 1 + q^2 per coordinate
    assert P.value(np.array([2.0])) == 5.0
    assert P.gradient(np.array([2.0]))[0] == 4.0
    assert P.hessian(np.array([2.0]))[0, 0] == 2.0
    with pytest.raises(ValueError):
        make_potential("quartic")

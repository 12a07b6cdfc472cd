"""Discrete Herglotz variational integrators for contact Lagrangian systems.

The integrator state is a point ``(q0, q1, z0)`` of ``Q x Q x R``; one step solves the
discrete Herglotz equations by Newton's method. Alongside it live the continuous
reference flow, the exact discrete Lagrangian (by shooting), and numerical checks of
the conformal contact structure and of the discrete Noether dissipation law.
"""
from .continuous import (CurveSamples, FlowConfig, advance, conformal_factor, contact_action, flow,
                         flow_samples, herglotz_field)
from .core import (ContinuousState, CotangentState, DiscreteLagrangian, DiscreteState, FreePotential,
                   HarmonicPotential, LagrangianModel, MechanicalLagrangian, PolynomialPotential, Potential,
                   energy, eval_lagrangian, free_particle, hamiltonian, harmonic_oscillator, legendre,
                   make_potential)
from .discrete import (Trajectory, hamiltonian_step, inverse_legendre_minus, legendre_minus, legendre_plus,
                       rollout, sigma_d, step, z_update)
from .discretize import (ExactDiscreteLagrangian, ExactStepData, FreeParticleExact, MidpointLagrangian,
                         ShootingConfig, exact_discrete, exact_retraction, exact_retraction_plus,
                         free_particle_exact, midpoint_discrete, shoot)
from .errors import (ConfigError, ConvergenceError, DegenerateStepError, DimensionError, HerglotzError,
                     NonFiniteStateError, RegularityError, RolloutError, ShootingError, SymmetryError)
from .geometry import (Covector, conformal_residual_minus, conformal_residual_plus, eta_minus, eta_plus,
                       hamiltonian_conformal_residual, pullback_residual, step_jacobian)
from .newton import NewtonConfig
from .symmetry import (InfinitesimalGenerator, dissipation_residual, invariance_residual, momentum,
                       momentum_series, rotation, translation)

__all__ = ["CurveSamples", "FlowConfig", "advance", "conformal_factor", "contact_action", "flow",
    "flow_samples", "herglotz_field", "ContinuousState", "CotangentState", "DiscreteLagrangian",
    "DiscreteState", "FreePotential", "HarmonicPotential", "LagrangianModel", "MechanicalLagrangian",
    "PolynomialPotential", "Potential", "energy", "eval_lagrangian", "free_particle", "hamiltonian",
    "harmonic_oscillator", "legendre", "make_potential", "Trajectory", "hamiltonian_step",
    "inverse_legendre_minus", "legendre_minus", "legendre_plus", "rollout", "sigma_d", "step", "z_update",
    "ExactDiscreteLagrangian", "ExactStepData", "FreeParticleExact", "MidpointLagrangian",
    "ShootingConfig", "exact_discrete", "exact_retraction", "exact_retraction_plus", "free_particle_exact",
    "midpoint_discrete", "shoot", "ConfigError", "ConvergenceError", "DegenerateStepError",
    "DimensionError", "HerglotzError", "NonFiniteStateError", "RegularityError", "RolloutError",
    "ShootingError", "SymmetryError", "Covector", "conformal_residual_minus", "conformal_residual_plus",
    "eta_minus", "eta_plus", "hamiltonian_conformal_residual", "pullback_residual", "step_jacobian",
    "NewtonConfig", "InfinitesimalGenerator", "dissipation_residual", "invariance_residual", "momentum",
    "momentum_series", "rotation", "translation"]

__version__ = "0.1.0"

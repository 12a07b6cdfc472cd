# %% [markdown]
# Numerical check of the conformal contact structure.
#
# The step map F of a discrete Herglotz system rescales the one-form
# eta- = (D1 L_d / sigma_d) dq0 + dz0 by sigma_d, i.e. F* eta- = sigma_d eta-.
# The Jacobian of F is taken by central differences of the implicit step,
# so residuals near 1e-9 are the finite-difference floor.

# %%
from herglotz import (DiscreteState, dissipation_residual, free_particle, free_particle_exact,
                      harmonic_oscillator, invariance_residual, midpoint_discrete, rotation)
from herglotz.geometry import (conformal_residual_minus, conformal_residual_plus, hamiltonian_conformal_residual,
                               pullback_residual, random_cotangents, random_states)

gamma, h = -0.05, 0.5
systems = {
    "free particle, midpoint": midpoint_discrete(free_particle(gamma), h),
    "oscillator, midpoint": midpoint_discrete(harmonic_oscillator(gamma), h),
    "free particle, exact": free_particle_exact(gamma, h),
}
states = random_states(50, 1, seed=11)
cots = random_cotangents(50, 1, seed=11)

for name, Ld in systems.items():
    rows = [
        ("F* eta- = sigma eta-", max(conformal_residual_minus(Ld, x) for x in states)),
        ("F* eta+ = sigma' eta+", max(conformal_residual_plus(Ld, x) for x in states)),
        ("F* eta- = eta+", max(pullback_residual(Ld, x) for x in states)),
        ("Hamiltonian side", max(hamiltonian_conformal_residual(Ld, c) for c in cots)),
    ]
    print(name)
    for label, r in rows:
        print(f"    {label:24s} {r:.2e}")

# %% [markdown]
# A planar isotropic oscillator is rotation invariant; its angular momentum
# contracts by sigma_d each step.

# %%
Ld2 = midpoint_discrete(harmonic_oscillator(gamma, dim=2), h)
x0 = DiscreteState([1.0, 0.0], [0.9, 0.4], 0.0)
gen = rotation(2)
print("invariance residual:", invariance_residual(Ld2, x0, gen))
print("dissipation residual over 30 steps:", dissipation_residual(Ld2, x0, 30, gen))

# %% [markdown]
# Damped free particle, L = v^2/2 + gamma z.
#
# With the midpoint discrete Lagrangian every step contracts the discrete
# momentum by the same factor sigma_d = 1 + h gamma. Velocities decay
# geometrically, and the action variable z rises, peaks and slowly relaxes.

# %%
import numpy as np

from herglotz import (DiscreteState, dissipation_residual, free_particle, free_particle_exact,
                      legendre_minus, midpoint_discrete, rollout, sigma_d, translation)

gamma, h = -0.05, 0.5
Ld = midpoint_discrete(free_particle(gamma), h)
x0 = DiscreteState([0.0], [1.0], 0.0)
traj = rollout(Ld, x0, 40)

print("sigma_d =", sigma_d(Ld, x0))
print(" k      t        q          z          p")
for k in range(0, 41, 5):
    p = legendre_minus(Ld, traj.states[k]).p[0]
    print(f"{k:2d} {traj.times[k]:6.2f} {traj.q[k, 0]:10.6f} {traj.z[k]:10.6f} {p:10.6f}")

# %% [markdown]
# The increments q_{k+1} - q_k form a geometric series with ratio sigma_d,
# so the particle stops at q_0 + (q_1 - q_0) / (1 - sigma_d) = 40.

# %%
dq = np.diff(traj.q[:, 0])
print("increment ratios:", np.unique(np.round(dq[1:] / dq[:-1], 12)))
print("limit:", x0.q0[0] + (x0.q1[0] - x0.q0[0]) / (1 - sigma_d(Ld, x0)))

# %% [markdown]
# Translations are a symmetry of L_d, and the momentum obeys J_{k+1} = sigma_d J_k.
# The exact discrete Lagrangian has sigma_d = e^{gamma h} and tracks the flow itself.

# %%
print("dissipation residual (midpoint):", dissipation_residual(Ld, x0, 40, translation(1)))
exact = free_particle_exact(gamma, h)
print("dissipation residual (exact):   ", dissipation_residual(exact, x0, 40, translation(1)))
print("exact sigma_d = e^{gamma h}:", sigma_d(exact, x0), np.exp(gamma * h))

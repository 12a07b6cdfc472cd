# %% [markdown]
# Damped harmonic oscillator: midpoint scheme against the exact discrete Lagrangian.
#
# The exact discrete Lagrangian is the contact action of the true trajectory joining
# q0 to q1 in time h, computed here by shooting. Its discrete flow samples the
# continuous flow, so its error is only the shooting tolerance.

# %%
import numpy as np

from herglotz import (ContinuousState, DiscreteState, exact_discrete, flow_samples, hamiltonian,
                      harmonic_oscillator, legendre, midpoint_discrete, rollout, shoot)

gamma, h, N = -0.05, 0.5, 20
model = harmonic_oscillator(gamma)
x0 = DiscreteState([0.0], [1.0], 0.0)

v0 = shoot(model, h, x0).v0
ref = flow_samples(model, ContinuousState(x0.q0, v0, x0.z0), h, N)
q_ref = np.array([s.q[0] for s in ref])

mid = rollout(midpoint_discrete(model, h), x0, N)
ex = rollout(exact_discrete(model, h), x0, N)

print(f"shooting v0 = {v0[0]:.10f}")
print(" k   q_flow       midpoint err   exact err")
for k in range(0, N + 1, 4):
    print(f"{k:2d} {q_ref[k]: .8f}   {abs(mid.q[k, 0] - q_ref[k]):.2e}      {abs(ex.q[k, 0] - q_ref[k]):.2e}")

# %% [markdown]
# Along the continuous flow H = p^2/2 + q^2/2 - gamma z satisfies dH/dt = gamma H,
# so log H falls by gamma h = -0.025 per step.

# %%
logH = np.log([hamiltonian(model, legendre(model, s)) for s in ref])
print("log H increments:", np.round(np.diff(logH)[:5], 12))
print("fitted slope:", np.polyfit(h * np.arange(N + 1), logH, 1)[0])

# %% [markdown]
# Convergence of the midpoint scheme: the error over t in [0, 2] at halving steps.

# %%
T = 2.0
errs = []
hs = [0.2, 0.1, 0.05, 0.025]
for hh in hs:
    n = int(round(T / hh))
    r = flow_samples(model, ContinuousState(x0.q0, [1.0], 0.0), hh, n)
    tr = rollout(midpoint_discrete(model, hh), DiscreteState(r[0].q, r[1].q, 0.0), n)
    errs.append(np.max(np.abs(tr.q[:n + 1, 0] - [s.q[0] for s in r])))
for a, b, hh in zip(errs, errs[1:], hs[1:]):
    print(f"h = {hh:<6} observed order {np.log(a / b) / np.log(2):.3f}")

"""Tour of the penalty functions and their proximal operator."""

import numpy as np

from l0relax import penalties

# The concave penalty rho_delta(b; lam) ramps like a scaled |b| near the
# origin and saturates at the constant lam once delta*b^2 >= 2*lam.
lam = 0.5
for delta in (0.25, 1.0, 4.0):
    knee = np.sqrt(2.0 * lam / delta)
    print(f"delta={delta:4.2f}  saturation at |b| = {knee:.4f}")
    for b in (0.1, 0.5, knee, 2.0, 5.0):
        print(f"    rho({b:6.4f}) = {penalties.mcp_value(b, delta, lam):.6f}")

# Same curve in the (gamma, lambda) parameterization common in the MCP
# literature.
delta = 1.0
gamma_t = 1.0 / delta
lambda_t = np.sqrt(2.0 * delta * lam)
b = 0.7
print("\ntwo parameterizations, one value:")
print("  (delta, lam) :", penalties.mcp_value(b, delta, lam))
print("  (gamma~, lam~):",
      penalties.mcp_value_mcp_parameterization(b, gamma_t, lambda_t))

# pwg_penalty is what the perspective relaxation charges per coordinate
# when delta = mu; it equals the concave penalty plus the ridge term.
mu = 0.3
b = 1.1
print("\nreverse-Huber identity at b = 1.1:")
print("  pwg_penalty          :", penalties.pwg_penalty(b, mu, lam))
print("  mcp + 0.5*mu*b^2     :",
      penalties.mcp_value(b, mu, lam) + 0.5 * mu * b * b)

# The prox has three regimes: hard zero, a shrunk middle branch, and
# identity once the penalty has saturated.
step = 0.5
delta = 1.0
print("\nprox_{step*rho}(v) across regimes (step=0.5, delta=1, lam=0.5):")
for v in (0.2, 0.6, 1.0, 1.5, 3.0):
    x = penalties.mcp_prox(v, step, delta, lam)
    print(f"  v={v:4.2f} -> {x:.6f}")

# Vector forms for solver inner loops.
rng = np.random.default_rng(0)
vec = rng.normal(size=6)
dvec = np.full(6, delta)
print("\nvector penalty total:", penalties.mcp_value_vec(vec, dvec, lam))
print("vector prox        :", penalties.mcp_prox_vec(vec, step, dvec, lam))

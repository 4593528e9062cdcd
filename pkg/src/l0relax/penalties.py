"""Closed-form penalties and proximal maps for the perspective relaxation.

The central object is the perspective penalty

    rho_delta(b; lam) = sqrt(2*delta*lam)*|b| - delta*b^2/2   if delta*b^2 <= 2*lam
                        lam                                    otherwise

which is the minimax concave penalty (MCP) in a different parameterization,
capped at lam and underestimating lam*1{b != 0}.  The reverse Huber penalty
is the delta = mu special case up to a ridge term; both identities are kept
branch-aligned so they hold to machine precision.
"""

from __future__ import annotations

import math

import numpy as np


class StepTooLargeError(Exception):
    """Prox step violates step*delta < 1, so the subproblem is not convex."""


def mcp_value(b, delta, lam):
    """Perspective/MCP penalty rho_delta(b; lam).

    Requires delta >= 0 and lam >= 0.  Returns 0 when delta == 0 or b == 0.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    b = float(b)
    if delta == 0.0 or b == 0.0:
        return 0.0
    # Both branches agree at delta*b^2 == 2*lam, so the exact comparison on
    # the computed product needs no tolerance.
    if delta * b * b <= 2.0 * lam:
        return math.sqrt(2.0 * delta * lam) * abs(b) - 0.5 * delta * b * b
    return float(lam)


def mcp_value_mcp_parameterization(b, gamma_tilde, lambda_tilde):
    """MCP in its native (gamma, lambda) form.

    Equals mcp_value(b, 1/gamma_tilde, gamma_tilde*lambda_tilde^2/2): the
    parameter dictionary is delta = 1/gamma_tilde, sqrt(2*delta*lam) =
    lambda_tilde, with saturation threshold |b| = gamma_tilde*lambda_tilde.
    Evaluated directly in the (gamma, lambda) variables to avoid round-trip
    rounding through the reciprocal.
    """
    if gamma_tilde <= 0:
        raise ValueError("gamma_tilde must be positive")
    if lambda_tilde < 0:
        raise ValueError("lambda_tilde must be nonnegative")
    b = float(b)
    if b == 0.0:
        return 0.0
    ab = abs(b)
    if ab <= gamma_tilde * lambda_tilde:
        return lambda_tilde * ab - b * b / (2.0 * gamma_tilde)
    return 0.5 * gamma_tilde * lambda_tilde * lambda_tilde


def reverse_huber(t):
    """Reverse Huber penalty B(t): |t| for |t| <= 1, (t^2 + 1)/2 beyond."""
    t = float(t)
    at = abs(t)
    if at <= 1.0:
        return at
    return 0.5 * (t * t + 1.0)


def pwg_penalty(b, mu, lam):
    """Ridge-adjusted perspective penalty 2*lam*B(sqrt(mu/(2*lam))*b).

    Algebraically identical to mcp_value(b, mu, lam) + mu*b^2/2; evaluated
    branchwise in (b, mu, lam) so that identity holds to machine precision
    (literally composing reverse_huber squares a sqrt and loses digits).
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    if lam <= 0:
        raise ValueError("lam must be positive")
    b = float(b)
    if b == 0.0:
        return 0.0
    if mu * b * b <= 2.0 * lam:
        return math.sqrt(2.0 * mu * lam) * abs(b)
    return lam + 0.5 * mu * b * b


def mcp_prox(v, step, delta, lam):
    """argmin_x (x - v)^2/(2*step) + rho_delta(x; lam), scalar closed form.

    Requires step > 0 and step*delta < 1, which makes the subproblem
    strictly convex (the solver's step rule guarantees it).  The minimizer
    is 0 inside the soft threshold, a rescaled soft-threshold inside the
    MCP region, and v itself in the saturated region; ties at the region
    boundaries fall to the smaller-|x| branch.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if step * delta >= 1.0:
        raise StepTooLargeError(f"step*delta = {step * delta:.3e} >= 1")
    v = float(v)
    if delta == 0.0:
        return v
    a = math.sqrt(2.0 * delta * lam)
    t = abs(v)
    if t <= step * a:
        return 0.0
    if t <= a / delta:
        return math.copysign((t - step * a) / (1.0 - step * delta), v)
    return v


def mcp_value_vec(b, delta, lam):
    """Vectorized sum of mcp_value over coordinates (delta per coordinate)."""
    b = np.asarray(b, dtype=float)
    delta = np.asarray(delta, dtype=float)
    inner = delta * b * b <= 2.0 * lam
    vals = np.where(
        inner,
        np.sqrt(2.0 * delta * lam) * np.abs(b) - 0.5 * delta * b * b,
        lam,
    )
    vals = np.where((delta == 0.0) | (b == 0.0), 0.0, vals)
    return float(np.sum(vals))


def mcp_prox_vec(v, step, delta, lam):
    """Vectorized mcp_prox with per-coordinate delta (same branch logic)."""
    v = np.asarray(v, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if np.any(step * delta >= 1.0):
        raise StepTooLargeError("step*delta >= 1 for some coordinate")
    a = np.sqrt(2.0 * delta * lam)
    t = np.abs(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        shrunk = np.sign(v) * (t - step * a) / (1.0 - step * delta)
        sat_bound = np.where(delta > 0, a / delta, np.inf)
    out = np.where(t <= step * a, 0.0, np.where(t <= sat_bound, shrunk, v))
    return np.where(delta == 0.0, v, out)

"""Hyperplane rounding of the lifted relaxation into feasible supports.

The relaxation's (b, B, z) are turned into a correlation-like matrix

    Z_ij = B_ij b_i b_j / (B_ii B_jj)     (0 where B_ii B_jj vanishes)
    T = P [[1, z'], [z, Z]] P',  P = [[1, 0'], [-e, 2I]]

whose diagonal is identically 1 and which is PSD exactly when Z >= zz'
with Z_ii = z_i.  Factor T = U U', draw standard normal v, and read the
sign pattern of U v: after flipping so the homogenizing coordinate is
+1, coordinate j joins the support when its sign agrees.  Each support
is polished by restricted least squares and scored with the exact L0
objective; the best of N samples is returned.

Sample k draws from the substream spawn_key=(k,) of the given seed, so
results do not depend on evaluation order and are reproducible bit for
bit.  Supports repeat often across samples, so least-squares solves are
cached per support.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import core, numerics

LIFT_TOL = 1e-12


@dataclass(frozen=True)
class CorrelationLift:
    Z: np.ndarray
    T: np.ndarray
    U: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Z", core._frozen_array(self.Z))
        object.__setattr__(self, "T", core._frozen_array(self.T))
        object.__setattr__(self, "U", core._frozen_array(self.U))


@dataclass(frozen=True)
class RoundingResult:
    z: np.ndarray
    b: np.ndarray
    nu: float
    N: int
    nus: np.ndarray
    seed: int
    support_masks: tuple
    skipped: tuple

    def __post_init__(self):
        object.__setattr__(self, "z", core._frozen_array(self.z))
        object.__setattr__(self, "b", core._frozen_array(self.b))
        object.__setattr__(self, "nus", core._frozen_array(self.nus))


def build_lift(primal, tol=LIFT_TOL):
    """Z, T, and the factor U = psd_factor(T) from a solved relaxation.

    A NotPSDError out of the factorization signals an inaccurate
    relaxation solve rather than a rounding bug.
    """
    b = np.asarray(primal.b, dtype=float)
    B = np.asarray(primal.B, dtype=float)
    z = np.asarray(primal.z, dtype=float)
    p = b.shape[0]
    Bii = np.diagonal(B)
    prod = np.outer(Bii, Bii)
    with np.errstate(divide="ignore", invalid="ignore"):
        Z = np.where(prod > tol * tol, B * np.outer(b, b) / prod, 0.0)
    Z = 0.5 * (Z + Z.T)
    M = np.empty((p + 1, p + 1))
    M[0, 0] = 1.0
    M[0, 1:] = z
    M[1:, 0] = z
    M[1:, 1:] = Z
    P = np.zeros((p + 1, p + 1))
    P[0, 0] = 1.0
    P[1:, 0] = -1.0
    P[1:, 1:] = 2.0 * np.eye(p)
    T = P @ M @ P.T
    T = 0.5 * (T + T.T)
    U = numerics.psd_factor(T, tol=1e-7)
    return CorrelationLift(Z=Z, T=T, U=U)


def gw_round(instance, primal, N, seed):
    """Best of N random-hyperplane roundings, deterministic given seed.

    Each sample k: v ~ N(0, I_r) from substream (seed, k); t = sign(U v)
    with sign(0) = +1, flipped so t[0] = +1; support j where t[j+1] = +1.
    The support's restricted least-squares solution is scored by the
    exact L0 objective.  Samples whose restricted solve is singular
    (possible only when mu = 0 with dependent columns) are skipped and
    recorded.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    lift = build_lift(primal)
    U = lift.U
    r = U.shape[1]
    p = instance.p

    cache = {}
    nus = np.empty(N)
    masks = []
    skipped = []
    best_k = -1
    best_nu = np.inf
    best_mask = 0
    for k in range(N):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(k,))
        )
        v = rng.standard_normal(r)
        t = np.where(U @ v >= 0.0, 1.0, -1.0)
        if t[0] < 0:
            t = -t
        on = t[1:] > 0
        mask = 0
        for j in np.flatnonzero(on):
            mask |= 1 << int(j)
        masks.append(mask)
        hit = cache.get(mask)
        if hit is None:
            support = np.flatnonzero(on)
            try:
                b_s = numerics.restricted_ls(
                    instance.X, instance.y, instance.mu, support
                )
            except numerics.NotPDError:
                cache[mask] = (None, np.inf)
                skipped.append(k)
                nus[k] = np.inf
                continue
            nu = core.objective_l0(instance, b_s)
            cache[mask] = (b_s, nu)
        else:
            b_s, nu = hit
            if b_s is None:
                skipped.append(k)
                nus[k] = np.inf
                continue
            nu = float(nu)
        nus[k] = nu
        if nu < best_nu:
            best_nu = nu
            best_k = k
            best_mask = mask
    if best_k < 0:
        raise numerics.NotPDError(
            "every rounding sample hit a singular restricted solve"
        )
    b_best = cache[best_mask][0]
    z_best = np.array([(best_mask >> j) & 1 for j in range(p)], dtype=float)
    return RoundingResult(
        z=z_best, b=b_best, nu=best_nu, N=N, nus=nus, seed=int(seed),
        support_masks=tuple(masks), skipped=tuple(skipped),
    )

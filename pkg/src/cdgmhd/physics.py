"""State algebra for ideal compressible MHD.

Conserved vectors are length-8 arrays (any number of leading batch axes):

    U = [rho, mx, my, mz, Bx, By, Bz, E]

with rho the density, m the momentum density, B the magnetic field and E the
total energy density.  The ideal equation of state closes the system:

    p = (gamma - 1) * rho_e,   rho_e = E - |m|^2/(2 rho) - |B|^2/2

A state is admissible when rho > 0 and rho_e > 0; that set is convex, and
positivity of pressure follows from positivity of rho_e.

Admissibility can be rewritten as positivity of a family of functions linear
in U: for auxiliary vectors (v*, B*),

    linear_form(U; v*, B*) = U . n* + |B*|^2 / 2,
    n* = (|v*|^2/2, -v*, -B*, 1)

All functions broadcast over leading axes and never mutate their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Component indices of the conserved vector.
RHO = 0
MX, MY, MZ = 1, 2, 3
BX, BY, BZ = 4, 5, 6
EN = 7
NCOMP = 8


@dataclass(frozen=True)
class IdealGas:
    """Ideal equation of state, p = (gamma - 1) * rho * e."""

    gamma: float = 5.0 / 3.0

    def pressure(self, rho_e):
        return (self.gamma - 1.0) * rho_e

    def rho_e_from_pressure(self, p):
        return np.asarray(p) / (self.gamma - 1.0)


def conserved(rho, v, B, p, eos: IdealGas):
    """Assemble conserved vectors from primitive quantities.

    Args:
        rho: density, shape (...,).
        v: velocity, shape (..., 3).
        B: magnetic field, shape (..., 3).
        p: thermal pressure, shape (...,).
        eos: equation of state.

    Returns:
        Conserved array of shape (..., 8).
    """
    rho = np.asarray(rho, dtype=float)
    v = np.asarray(v, dtype=float)
    B = np.asarray(B, dtype=float)
    p = np.asarray(p, dtype=float)
    shape = np.broadcast_shapes(rho.shape, v.shape[:-1], B.shape[:-1], p.shape)
    U = np.empty(shape + (NCOMP,))
    U[..., RHO] = rho
    U[..., MX:MZ + 1] = rho[..., None] * v
    U[..., BX:BZ + 1] = B
    kinetic = 0.5 * rho * np.sum(v * v, axis=-1)
    magnetic = 0.5 * np.sum(B * B, axis=-1)
    U[..., EN] = kinetic + magnetic + eos.rho_e_from_pressure(p)
    return U


def primitive(U, eos: IdealGas):
    """Recover (rho, v, B, p) from conserved vectors.  Requires rho != 0."""
    U = np.asarray(U)
    rho = U[..., RHO]
    v = U[..., MX:MZ + 1] / rho[..., None]
    B = U[..., BX:BZ + 1]
    p = eos.pressure(internal_energy_density(U))
    return rho, v, B, p


def internal_energy_density(U):
    """rho_e = E - |m|^2/(2 rho) - |B|^2/2.  Requires rho != 0."""
    U = np.asarray(U)
    m2 = np.sum(U[..., MX:MZ + 1] ** 2, axis=-1)
    B2 = np.sum(U[..., BX:BZ + 1] ** 2, axis=-1)
    return U[..., EN] - 0.5 * m2 / U[..., RHO] - 0.5 * B2


def admissible(U):
    """Pointwise admissibility mask: rho > 0 and rho_e > 0."""
    U = np.asarray(U)
    rho = U[..., RHO]
    ok = rho > 0.0
    # Guard the division; inadmissible density short-circuits the energy test.
    safe_rho = np.where(ok, rho, 1.0)
    m2 = np.sum(U[..., MX:MZ + 1] ** 2, axis=-1)
    B2 = np.sum(U[..., BX:BZ + 1] ** 2, axis=-1)
    rho_e = U[..., EN] - 0.5 * m2 / safe_rho - 0.5 * B2
    return ok & (rho_e > 0.0)


def linear_form(U, v_aux, B_aux):
    """Admissibility written as a function linear in U.

    linear_form(U; v*, B*) = U . (|v*|^2/2, -v*, -B*, 1) + |B*|^2/2.

    For admissible U this is positive for every auxiliary pair, with minimum
    over (v*, B*) attained at the state's own (v, B), where it equals rho_e.
    """
    U = np.asarray(U)
    v_aux = np.asarray(v_aux, dtype=float)
    B_aux = np.asarray(B_aux, dtype=float)
    val = (
        0.5 * U[..., RHO] * np.sum(v_aux * v_aux, axis=-1)
        - np.sum(U[..., MX:MZ + 1] * v_aux, axis=-1)
        - np.sum(U[..., BX:BZ + 1] * B_aux, axis=-1)
        + U[..., EN]
        + 0.5 * np.sum(B_aux * B_aux, axis=-1)
    )
    return val


def flux(U, eos: IdealGas, axis: int):
    """Physical flux along one coordinate axis.

    Args:
        U: conserved array (..., 8).
        eos: equation of state.
        axis: 0, 1 or 2 for the x/y/z flux component.

    Returns:
        Flux array of shape (..., 8).  The normal magnetic component's row of
        the flux along its own axis cancels exactly (vi*Bi - Bi*vi), so a
        constant normal field is preserved to the last bit in 1D.
    """
    U = np.asarray(U)
    rho = U[..., RHO]
    m = U[..., MX:MZ + 1]
    B = U[..., BX:BZ + 1]
    E = U[..., EN]
    v = m / rho[..., None]
    p = eos.pressure(internal_energy_density(U))
    ptot = p + 0.5 * np.sum(B * B, axis=-1)
    vi = v[..., axis]
    Bi = B[..., axis]
    F = np.empty_like(U)
    F[..., RHO] = m[..., axis]
    F[..., MX:MZ + 1] = vi[..., None] * m - Bi[..., None] * B
    F[..., MX + axis] += ptot
    F[..., BX:BZ + 1] = vi[..., None] * B - Bi[..., None] * v
    F[..., EN] = vi * (E + ptot) - Bi * np.sum(v * B, axis=-1)
    return F


def godunov_powell_source(U):
    """Source direction S(U) = (0, B, v, v.B) multiplying -div(B)."""
    U = np.asarray(U)
    v = U[..., MX:MZ + 1] / U[..., RHO][..., None]
    S = np.empty_like(U)
    S[..., RHO] = 0.0
    S[..., MX:MZ + 1] = U[..., BX:BZ + 1]
    S[..., BX:BZ + 1] = v
    S[..., EN] = np.sum(v * U[..., BX:BZ + 1], axis=-1)
    return S


def _fast_speed_sq(rho, B, Bi, cs2):
    # Largest root of the dispersion quadratic; the discriminant is a sum of
    # squares and only dips below zero through rounding.
    B2_over_rho = np.sum(np.asarray(B) ** 2, axis=-1) / rho
    a = B2_over_rho + cs2
    disc = a * a - 4.0 * (Bi * Bi) * cs2 / rho
    return 0.5 * (a + np.sqrt(np.maximum(disc, 0.0)))


def split_speed(U, eos: IdealGas, axis: int):
    """Sonic-like speed entering the pairwise wave-speed bound.

    Uses the modified sound speed cs~ = p / (rho * sqrt(2 e)), not the usual
    gas sound speed; for an ideal gas cs~ = sqrt((gamma-1) p / (2 rho)).
    """
    U = np.asarray(U)
    rho = U[..., RHO]
    rho_e = internal_energy_density(U)
    p = eos.pressure(rho_e)
    cs2 = p * p / (2.0 * rho * rho_e)
    return np.sqrt(_fast_speed_sq(rho, U[..., BX:BZ + 1], U[..., BX + axis], cs2))


def max_signal_speed(U, eos: IdealGas, axis: int):
    """|v_axis| + fast magnetosonic speed (spectral radius of the flux Jacobian)."""
    U = np.asarray(U)
    rho = U[..., RHO]
    p = eos.pressure(internal_energy_density(U))
    cs2 = eos.gamma * p / rho
    cf = np.sqrt(_fast_speed_sq(rho, U[..., BX:BZ + 1], U[..., BX + axis], cs2))
    return np.abs(U[..., MX + axis] / rho) + cf


def pairwise_wave_speed(U, Ut, eos: IdealGas, axis: int):
    """Wave-speed bound alpha_axis(U, Ut) for a pair of admissible states.

    Any split-flux coefficient exceeding this value makes the two-state
    flux-split form positive; it is symmetric in its two states.

    Args:
        U, Ut: conserved arrays (..., 8), broadcast-compatible.
        eos: equation of state.
        axis: flux direction, 0..2.

    Returns:
        alpha, shape (...).
    """
    U = np.asarray(U)
    Ut = np.asarray(Ut)
    rho, rho_t = U[..., RHO], Ut[..., RHO]
    sq, sq_t = np.sqrt(rho), np.sqrt(rho_t)
    vi = U[..., MX + axis] / rho
    vi_t = Ut[..., MX + axis] / rho_t
    c = split_speed(U, eos, axis)
    c_t = split_speed(Ut, eos, axis)
    roe = np.abs(sq * vi + sq_t * vi_t) / (sq + sq_t) + np.maximum(c, c_t)
    base = np.maximum(np.maximum(np.abs(vi) + c, np.abs(vi_t) + c_t), roe)
    dB = np.linalg.norm(U[..., BX:BZ + 1] - Ut[..., BX:BZ + 1], axis=-1)
    return base + dB / (sq + sq_t)

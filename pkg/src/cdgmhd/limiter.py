"""Scaling limiter that pulls cell polynomials toward their averages.

Works in two stages on a fixed set of control points.  Stage one rescales
the density modes so no control point dips under a floor; stage two finds,
per point, where the segment from the cell average to the point state
crosses the internal-energy floor and rescales every component by the
smallest such fraction.  Internal energy is concave in the conserved
state, so the linear chord undershoots the true crossing and the result
is guaranteed admissible without any root finding.

Both stages only scale modes above the mean, so cell averages never move
and a solenoidal magnetic pair stays solenoidal (that subspace contains
the constants and is closed under scaling).

The control points are every point where either mesh's residual assembly
or wave-speed estimate reads this field: per half (1D) or quarter (2D),
the volume Gauss points plus the Gauss/Lobatto tensor mixes that contain
the face points.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np

from . import basis
from .quadrature import build_quadrature

EPS_CAP = 1e-13
# The energy floor must sit above the float cancellation noise of
# E - |m|^2/2rho - |B|^2/2, which scales with the size of the terms, not
# with the (possibly tiny) difference.  1e-12 of the term magnitude keeps
# the floor an order above the noise while staying far below any
# physically meaningful internal energy.
EPS_REL = 1e-12


@dataclass(frozen=True)
class LimitResult:
    """Outcome of one limiter sweep over a field."""

    cells: int
    limited_density: int
    limited_energy: int
    min_scale: float
    bad_cell: int = -1

    @property
    def ok(self) -> bool:
        return self.bad_cell < 0

    @property
    def limited(self) -> int:
        return max(self.limited_density, self.limited_energy)


@lru_cache(maxsize=None)
def control_points_1d(k: int) -> np.ndarray:
    """Basis table (M, P) at the 1D control points, both half cells."""
    q = build_quadrature(k)
    half = np.concatenate([q.gauss_x, q.lobatto_x])
    xi = np.concatenate([half - 1.0, half])
    return basis.table_1d(k, xi)


@lru_cache(maxsize=None)
def control_points_2d(k: int) -> np.ndarray:
    """Basis table (M, P) at the 2D control points, all four quarters."""
    q = build_quadrature(k)
    g, l = q.gauss_x, q.lobatto_x
    mixes = [(l, g), (g, l), (g, g)]
    us = np.concatenate([np.repeat(a, b.size) for a, b in mixes])
    vs = np.concatenate([np.tile(b, a.size) for a, b in mixes])
    xi = np.concatenate([us + (hx - 1.0) for hx in (0, 1) for _ in (0, 1)])
    eta = np.concatenate([vs + (hy - 1.0) for _ in (0, 1) for hy in (0, 1)])
    return basis.table_2d(k, xi, eta)


@numba.njit(cache=True)
def _certain(c, mphi, eps_cap, eps_rel, mask):
    """Flag cells that provably need no limiting; c is (nc, 8, M).

    mphi[m-1] bounds |phi_m| over the control points, so every point value
    of component q stays within +-delta_q of the average, with delta_q the
    mphi-weighted sum of the higher mode magnitudes.  A cell passes when
    the worst corner of that box still clears both floors: the density
    interval stays above eps_r, and the internal-energy lower bound (small
    density, large momentum and field) stays above eps_e.  The bound only
    ever errs toward "uncertain", so the exact point scan downstream sees
    a superset of the cells it would have touched.
    """
    nc, _, nm = c.shape
    for n in range(nc):
        rho0 = c[n, 0, 0]
        m2 = c[n, 1, 0] ** 2 + c[n, 2, 0] ** 2 + c[n, 3, 0] ** 2
        b2 = c[n, 4, 0] ** 2 + c[n, 5, 0] ** 2 + c[n, 6, 0] ** 2
        eint0 = c[n, 7, 0] - 0.5 * m2 / rho0 - 0.5 * b2
        if not (rho0 > 0.0 and eint0 > 0.0):
            mask[n] = False
            continue
        d0 = 0.0
        d1 = 0.0
        d2 = 0.0
        d3 = 0.0
        d4 = 0.0
        d5 = 0.0
        d6 = 0.0
        d7 = 0.0
        for m in range(1, nm):
            w = mphi[m - 1]
            d0 += abs(c[n, 0, m]) * w
            d1 += abs(c[n, 1, m]) * w
            d2 += abs(c[n, 2, m]) * w
            d3 += abs(c[n, 3, m]) * w
            d4 += abs(c[n, 4, m]) * w
            d5 += abs(c[n, 5, m]) * w
            d6 += abs(c[n, 6, m]) * w
            d7 += abs(c[n, 7, m]) * w
        rho_lo = rho0 - d0
        eps_r = eps_cap if eps_cap < rho0 else rho0
        if not rho_lo >= eps_r:
            mask[n] = False
            continue
        escale = abs(c[n, 7, 0]) + 0.5 * m2 / rho0 + 0.5 * b2
        eps_e = eps_cap if eps_cap > eps_rel * escale else eps_rel * escale
        if eps_e > eint0:
            eps_e = eint0
        mhi = (abs(c[n, 1, 0]) + d1) ** 2 + (abs(c[n, 2, 0]) + d2) ** 2 + (abs(c[n, 3, 0]) + d3) ** 2
        bhi = (abs(c[n, 4, 0]) + d4) ** 2 + (abs(c[n, 5, 0]) + d5) ** 2 + (abs(c[n, 6, 0]) + d6) ** 2
        e_lo = (c[n, 7, 0] - d7) - 0.5 * mhi / rho_lo - 0.5 * bhi
        mask[n] = e_lo > eps_e
    return mask


@numba.njit(cache=True)
def _scan(c, v, eps_cap, eps_rel):
    """Limit each cell in place; c is (nc, 8, M), v is (nc, 8, P).

    Returns (bad_cell, n_density, n_energy, min_scale).  bad_cell >= 0
    flags the first cell whose average itself is inadmissible, in which
    case nothing was modified beyond the cells before it.
    """
    nc, _, nm = c.shape
    npts = v.shape[2]
    n_rho = 0
    n_e = 0
    min_scale = 1.0
    for n in range(nc):
        rho0 = c[n, 0, 0]
        m2 = c[n, 1, 0] ** 2 + c[n, 2, 0] ** 2 + c[n, 3, 0] ** 2
        b2 = c[n, 4, 0] ** 2 + c[n, 5, 0] ** 2 + c[n, 6, 0] ** 2
        eint0 = c[n, 7, 0] - 0.5 * m2 / rho0 - 0.5 * b2
        if not (rho0 > 0.0 and eint0 > 0.0):
            return n, n_rho, n_e, min_scale

        eps_r = eps_cap if eps_cap < rho0 else rho0
        rho_min = v[n, 0, 0]
        for p in range(1, npts):
            if v[n, 0, p] < rho_min:
                rho_min = v[n, 0, p]
        s1 = 1.0
        if rho_min < eps_r:
            s1 = (rho0 - eps_r) / (rho0 - rho_min)
            n_rho += 1

        escale = abs(c[n, 7, 0]) + 0.5 * m2 / rho0 + 0.5 * b2
        eps_e = eps_cap if eps_cap > eps_rel * escale else eps_rel * escale
        if eps_e > eint0:
            eps_e = eint0
        s2 = 1.0
        for p in range(npts):
            r = rho0 + s1 * (v[n, 0, p] - rho0)
            m2 = v[n, 1, p] ** 2 + v[n, 2, p] ** 2 + v[n, 3, p] ** 2
            b2 = v[n, 4, p] ** 2 + v[n, 5, p] ** 2 + v[n, 6, p] ** 2
            ei = v[n, 7, p] - 0.5 * m2 / r - 0.5 * b2
            if not ei > eps_e:
                denom = eint0 - ei
                if denom > 0.0:
                    sp = (eint0 - eps_e) / denom
                    if sp < s2:
                        s2 = sp
        if s2 < 1.0:
            n_e += 1

        if s1 < 1.0:
            for m in range(1, nm):
                c[n, 0, m] *= s1
        if s2 < 1.0:
            for comp in range(8):
                for m in range(1, nm):
                    c[n, comp, m] *= s2
        scale = s1 * s2
        if scale < min_scale:
            min_scale = scale
    return -1, n_rho, n_e, min_scale


# Cells per scan chunk: keeps the point-value block cache resident instead
# of materializing it for the whole mesh at once.
_CHUNK = 2048


def limit_blocks(blocks: np.ndarray, table: np.ndarray) -> LimitResult:
    """Limit a stack of coefficient blocks in place.

    blocks is (..., 8, M) and may be a strided view; table is the (M, P)
    control-point table for the matching dimension and degree.
    """
    shape = blocks.shape
    nc = int(np.prod(shape[:-2])) if len(shape) > 2 else shape[0]
    c = np.ascontiguousarray(blocks).reshape(nc, 8, shape[-1])
    npts = table.shape[1]

    # Interval prefilter: only cells the box bound cannot clear take the
    # full control-point evaluation.  Valid only while mode 0 is the plain
    # average (constant basis function 1).
    sub = None
    if table.shape[0] > 1 and np.all(table[0] == 1.0):
        mask = _certain(c, np.abs(table[1:]).max(axis=1), EPS_CAP, EPS_REL, np.empty(nc, np.bool_))
        idx = np.flatnonzero(~mask)
        if idx.size == 0:
            if c.base is not blocks:
                blocks[...] = c.reshape(shape)
            return LimitResult(nc, 0, 0, 1.0, -1)
        if idx.size < nc:
            sub = idx
            work = c[idx]
        else:
            work = c
    else:
        work = c

    nw = work.shape[0]
    buf = np.empty((min(_CHUNK, nw) * 8, npts))
    bad = -1
    n_rho = 0
    n_e = 0
    min_scale = 1.0
    for lo in range(0, nw, _CHUNK):
        hi = min(lo + _CHUNK, nw)
        m = hi - lo
        vals = np.dot(work[lo:hi].reshape(m * 8, -1), table, out=buf[: m * 8])
        b, nr, ne, ms = _scan(work[lo:hi], vals.reshape(m, 8, npts), EPS_CAP, EPS_REL)
        n_rho += nr
        n_e += ne
        if ms < min_scale:
            min_scale = ms
        if b >= 0:
            bad = lo + b
            break
    if sub is not None:
        c[sub] = work
        if bad >= 0:
            bad = int(sub[bad])
    if c.base is not blocks:
        blocks[...] = c.reshape(shape)
    return LimitResult(nc, n_rho, n_e, min_scale, bad)

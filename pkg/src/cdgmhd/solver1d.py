"""One-dimensional scheme on the overlapping grid pair.

Each mesh's cells update from the other mesh's polynomials only: the
fluxes at a cell's endpoints are read off the opposite field, which is
smooth there (endpoints sit at the centers of opposite cells), so no
interface problem is ever solved.  A relaxation term pulls each field
toward the projection of the other at rate 1/tau.

Every integral is split at the cell midpoint, where the opposite field
may jump, and done with the scheme's Gauss rule on each half.  The
half-cell projection entering the relaxation term collapses to two fixed
transfer matrices, computed once per degree.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from . import basis
from .field import Field1D, fill_ghosts_1d
from .limiter import control_points_1d, limit_blocks
from .mesh import Boundary, Mesh1D
from .physics import (
    BX,
    RHO,
    IdealGas,
    admissible,
    flux,
    godunov_powell_source,
    internal_energy_density,
    pairwise_wave_speed,
)
from .quadrature import build_quadrature
from .timeloop import StepRecord, Violation, advance_step


@dataclass(frozen=True)
class Tables1D:
    """Per-degree reference tables for residual assembly.

    Left-half quadrature nodes live at g - 1 in a cell's own coordinate
    and at g in the overlapping opposite cell's coordinate (and the other
    way round on the right half), so the same two tables serve both roles.
    """

    w: np.ndarray
    tl: np.ndarray
    tr: np.ndarray
    dl: np.ndarray
    dr: np.ndarray
    center: np.ndarray
    end_l: np.ndarray
    end_r: np.ndarray
    rel_lo: np.ndarray
    rel_hi: np.ndarray


@lru_cache(maxsize=None)
def tables_1d(k: int) -> Tables1D:
    q = build_quadrature(k)
    g, w = q.gauss_x, q.gauss_w
    tl = basis.table_1d(k, g - 1.0)
    tr = basis.table_1d(k, g)
    dl = basis.table_1d(k, g - 1.0, deriv=1)
    dr = basis.table_1d(k, g, deriv=1)
    center = basis.table_1d(k, np.zeros(1))[:, 0]
    end_l = basis.table_1d(k, np.full(1, -1.0))[:, 0]
    end_r = basis.table_1d(k, np.ones(1))[:, 0]
    rel_lo = 0.5 * (tl * w) @ tr.T
    rel_hi = 0.5 * (tr * w) @ tl.T
    return Tables1D(w, tl, tr, dl, dr, center, end_l, end_r, rel_lo, rel_hi)


def residual_1d(
    own: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    eos: IdealGas,
    dx: float,
    tau: float,
    k: int,
    df: bool,
) -> np.ndarray:
    """Semi-discrete residual for one mesh's coefficient blocks.

    own is (nc, 8, M); lo and hi hold the opposite cells overlapping each
    own cell's left and right halves.  df replaces the normal-field row
    with its locally solenoidal projection, killing its non-constant
    modes; otherwise the divergence source term is added.
    """
    t = tables_1d(k)
    ulo = np.einsum("ncm,ms->nsc", lo, t.tr, optimize=True)
    uhi = np.einsum("ncm,ms->nsc", hi, t.tl, optimize=True)
    flo = flux(ulo, eos, 0)
    fhi = flux(uhi, eos, 0)
    vol = np.einsum("nsc,ms->ncm", flo, t.dl * t.w, optimize=True)
    vol += np.einsum("nsc,ms->ncm", fhi, t.dr * t.w, optimize=True)
    f_left = flux(lo @ t.center, eos, 0)
    f_right = flux(hi @ t.center, eos, 0)
    face = np.einsum("nc,m->ncm", f_right, t.end_r) - np.einsum("nc,m->ncm", f_left, t.end_l)
    relax = np.einsum("ncm,pm->ncp", lo, t.rel_lo, optimize=True)
    relax += np.einsum("ncm,pm->ncp", hi, t.rel_hi, optimize=True)
    relax -= own
    out = relax / tau + (vol - face) / dx
    if df:
        out[:, BX, 1:] = 0.0
    else:
        two_dx = 2.0 / dx
        divb_lo = two_dx * np.einsum("nm,ms->ns", lo[:, BX], t.dr, optimize=True)
        divb_hi = two_dx * np.einsum("nm,ms->ns", hi[:, BX], t.dl, optimize=True)
        slo = godunov_powell_source(ulo) * divb_lo[:, :, None]
        shi = godunov_powell_source(uhi) * divb_hi[:, :, None]
        out -= 0.5 * (
            np.einsum("nsc,ms->ncm", slo, t.tl * t.w, optimize=True)
            + np.einsum("nsc,ms->ncm", shi, t.tr * t.w, optimize=True)
        )
    return out


def max_pair_speed_1d(primal_full: np.ndarray, dual_all: np.ndarray, k: int, eos: IdealGas) -> float:
    """Largest pairwise signal speed over the endpoint pairs of both meshes.

    Each cell of one mesh is bounded by two center lines of the other mesh;
    the pair fed to the speed bound is the bounding field's value at those
    two points (the two face arguments of that cell's average update).  Ghost
    primal cells make the straddling dual cells' pairs available too.
    """
    t = tables_1d(k)
    pc = primal_full @ t.center
    dc = dual_all @ t.center
    a = pairwise_wave_speed(pc[1:], pc[:-1], eos, 0)
    b = pairwise_wave_speed(dc[1:], dc[:-1], eos, 0)
    return float(max(a.max(), b.max()))


@dataclass
class Scheme1D:
    """Driver owning both fields and the stepping controls."""

    mesh: Mesh1D
    k: int
    eos: IdealGas
    bc_left: Boundary
    bc_right: Boundary
    df: bool = True
    limiter: bool = True
    theta: float = 1.0
    cfl: float = 0.25
    use_practical_dt: bool = True
    t: float = 0.0
    primal: Field1D = dc_field(init=False)
    dual: Field1D = dc_field(init=False)

    def __post_init__(self) -> None:
        self.primal = Field1D.zeros(self.mesh, self.k)
        self.dual = Field1D.zeros(self.mesh, self.k, dual=True)

    def set_initial(self, fn) -> None:
        wrap = self.bc_left.kind == "periodic"
        self.primal.project(fn)
        self.dual.project(fn, wrap=wrap)
        if wrap:
            # The two straddling dual cells are one physical cell; syncing
            # them here keeps them bitwise duplicates forever after, since
            # they then see identical data every stage.
            self.dual.coeffs[-1] = self.dual.coeffs[0]
        if self.df:
            self.primal.interior[:, BX, 1:] = 0.0
            self.dual.interior[:, BX, 1:] = 0.0
        viol = self._limit([self.primal.coeffs, self.dual.coeffs], stage=-1)[0]
        if viol is not None:
            raise ValueError("initial data has inadmissible cell averages")

    def _fill(self, primal_coeffs: np.ndarray) -> None:
        shell = Field1D(self.mesh, self.k, False, primal_coeffs)
        fill_ghosts_1d(shell, self.bc_left, self.bc_right)

    def rhs_for(self, dt: float):
        tau = dt / self.theta

        def rhs(arrays):
            p_full, d_all = arrays
            self._fill(p_full)
            rp = residual_1d(
                p_full[1:-1], d_all[:-1], d_all[1:],
                self.eos, self.mesh.dx, tau, self.k, self.df,
            )
            rd = residual_1d(
                d_all, p_full[:-1], p_full[1:],
                self.eos, self.mesh.dx, tau, self.k, self.df,
            )
            rp_full = np.zeros_like(p_full)
            rp_full[1:-1] = rp
            return rp_full, rd

        return rhs

    def _limit(self, arrays, stage: int):
        p_full, d_all = arrays
        if not self.limiter:
            for mesh, block in (("primal", p_full[1:-1]), ("dual", d_all)):
                ok = admissible(block[..., 0])
                if not ok.all():
                    cell = int(np.argwhere(~ok)[0][0])
                    return Violation(mesh, stage, cell), 0, 1.0
            return None, 0, 1.0
        tab = control_points_1d(self.k)
        res_p = limit_blocks(p_full[1:-1], tab)
        if not res_p.ok:
            return Violation("primal", stage, res_p.bad_cell), 0, 1.0
        res_d = limit_blocks(d_all, tab)
        if not res_d.ok:
            return Violation("dual", stage, res_d.bad_cell), 0, 1.0
        limited = res_p.limited + res_d.limited
        return None, limited, min(res_p.min_scale, res_d.min_scale)

    def signal_speed(self) -> float:
        self._fill(self.primal.coeffs)
        return max_pair_speed_1d(self.primal.coeffs, self.dual.coeffs, self.k, self.eos)

    def dt_theory(self, a1: float) -> float:
        w1 = build_quadrature(self.k).first_lobatto_weight
        return 0.5 * self.theta * w1 * self.mesh.dx / a1

    def dt_practical(self, a1: float) -> float:
        return self.cfl * self.mesh.dx / a1

    def step(self, t_end: float) -> StepRecord:
        a1 = self.signal_speed()
        state = [self.primal.coeffs, self.dual.coeffs]
        new, rec = advance_step(
            state, self.t, t_end,
            (self.dt_practical(a1), self.dt_theory(a1)),
            self.rhs_for, self._limit, self.use_practical_dt,
        )
        if rec.ok:
            self.primal.coeffs, self.dual.coeffs = new
            self.t = rec.t_new
        return rec

    def run(self, t_end: float, max_steps: int = 1_000_000, on_step=None) -> StepRecord:
        rec = StepRecord(self.t, 0.0, 0, 0, 1.0)
        for _ in range(max_steps):
            if self.t >= t_end * (1.0 - 1e-14):
                break
            rec = self.step(t_end)
            if on_step is not None:
                on_step(self, rec)
            if not rec.ok:
                break
        return rec

    def min_average_density_pressure(self) -> tuple[float, float]:
        gm1 = self.eos.gamma - 1.0
        rho = np.inf
        p = np.inf
        for avg in (self.primal.averages, self.dual.averages):
            rho = min(rho, float(avg[..., RHO].min()))
            p = min(p, gm1 * float(internal_energy_density(avg).min()))
        return rho, p

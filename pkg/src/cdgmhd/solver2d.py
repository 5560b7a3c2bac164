"""2D central DG residuals on overlapping rectangle meshes.

Two scheme variants share one assembly core.  The standard variant evolves
the conservative system; the locally divergence-free variant adds interior
jump-source line integrals and keeps every cell's in-plane magnetic pair
solenoidal, which is what makes the positivity proof go through.

The core exploits a symmetry of the mesh pair: seen from either mesh, each
own cell is covered by four quarter overlaps of opposite cells, its face
lines are center lines of opposite cells, and its interior cross segments
are interfaces of opposite cells.  One routine therefore serves both update
directions; only the array roles swap.

Index conventions, fixed throughout:
  - own interior block has shape (n1, n2, 8, M), row-major (y, x);
  - the opposite array has shape (n1 + 1, n2 + 1, 8, M) and quarter
    (hy, hx) of own cell (r, c) lives in opposite array cell (r + hy, c + hx),
    so each quarter reads the slice [hy:hy+n1, hx:hx+n2];
  - reference coordinate maps per axis and half h: own point xi = h - 1 + u,
    opposite point xi' = u - h, u in [0, 1] Gauss nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np

from . import basis
from .field import Field2D
from .physics import (
    BX,
    BY,
    RHO,
    IdealGas,
    admissible,
    internal_energy_density,
)
from .quadrature import build_quadrature

DIV_GUARD = 1e-10

VARIANT_TAGS = ("standard", "locally_df_pp")


class InadmissiblePoint(RuntimeError):
    """A quadrature-point state left the admissible set (or went non-finite)."""

    def __init__(self, mesh: str, where: tuple, constraint: str, value: float):
        self.mesh = mesh
        self.where = where
        self.constraint = constraint
        self.value = value
        super().__init__(f"{constraint} violated on {mesh} mesh at {where}: {value:.6e}")


@dataclass(frozen=True)
class SchemeVariant:
    """Scheme selector.

    source means the interior jump-source integrals for locally_df_pp (on by
    default and required by the positivity guarantee; switching it off exists
    to demonstrate the breakdown) and the naive in-cell volume source for the
    standard tag (off by default, not positivity-preserving).
    """

    tag: str = "locally_df_pp"
    limiter: bool = True
    source: bool = True

    def __post_init__(self) -> None:
        if self.tag not in VARIANT_TAGS:
            raise ValueError(f"unknown scheme tag {self.tag!r}")

    @property
    def locally_df(self) -> bool:
        return self.tag == "locally_df_pp"


STANDARD = SchemeVariant("standard", limiter=True, source=False)
LOCALLY_DF_PP = SchemeVariant("locally_df_pp", limiter=True, source=True)


@dataclass
class Residual2D:
    primal: np.ndarray
    dual: np.ndarray


@dataclass
class DivergenceReport:
    div_primal: np.ndarray
    div_dual: np.ndarray
    tilde_primal: np.ndarray
    tilde_dual: np.ndarray
    eps: float


@dataclass(frozen=True)
class Tables2D:
    """Mode-gathered point tables; x tables gather by the x exponent, y by y.

    The second block holds precontracted matmul forms of the same data: the
    assembly loop is two flat GEMMs per term (modes -> points, scaled point
    values -> mode weights) around one fused pointwise kernel, which is what
    keeps the residual's Python overhead flat in the cell count.
    """

    w: np.ndarray
    gxo: tuple
    gyo: tuple
    gxo_w: tuple
    gyo_w: tuple
    dgxo_w: tuple
    dgyo_w: tuple
    gxp: tuple
    gyp: tuple
    cx: np.ndarray
    cy: np.ndarray
    exm: np.ndarray
    exp_: np.ndarray
    eym: np.ndarray
    eyp: np.ndarray
    relax: tuple
    divtab: tuple
    relaxT: tuple
    volT: tuple
    volW: tuple
    srcW: tuple
    divTf: tuple
    xfT: tuple
    xfWp: tuple
    xfWm: tuple
    yfT: tuple
    yfWp: tuple
    yfWm: tuple
    xsTp: tuple
    xsTm: tuple
    xsW: tuple
    ysTp: tuple
    ysTm: tuple
    ysW: tuple


@lru_cache(maxsize=None)
def tables_2d(k: int) -> Tables2D:
    q = build_quadrature(k)
    g, w = q.gauss_x, q.gauss_w
    modes = np.asarray(basis.modes_2d(k))
    mx, my = modes[:, 0], modes[:, 1]

    def gath(tab: np.ndarray, which: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(tab[which])

    own = [basis.table_1d(k, g - 1.0), basis.table_1d(k, g)]
    down = [basis.table_1d(k, g - 1.0, deriv=1), basis.table_1d(k, g, deriv=1)]
    opp = [basis.table_1d(k, g), basis.table_1d(k, g - 1.0)]
    cen = basis.table_1d(k, np.zeros(1))[:, 0]
    em = basis.table_1d(k, np.full(1, -1.0))[:, 0]
    ep = basis.table_1d(k, np.ones(1))[:, 0]

    gxo = tuple(gath(own[h], mx) for h in (0, 1))
    gyo = tuple(gath(own[h], my) for h in (0, 1))
    gxo_w = tuple(t * w for t in gxo)
    gyo_w = tuple(t * w for t in gyo)
    dgxo_w = tuple(gath(down[h], mx) * w for h in (0, 1))
    dgyo_w = tuple(gath(down[h], my) * w for h in (0, 1))
    gxp = tuple(gath(opp[h], mx) for h in (0, 1))
    gyp = tuple(gath(opp[h], my) for h in (0, 1))

    relax = tuple(
        tuple(0.25 * (gxo_w[hx] @ gxp[hx].T) * (gyo_w[hy] @ gyp[hy].T) for hx in (0, 1))
        for hy in (0, 1)
    )

    # Tables of the degree-(k-1) modes at opposite-frame quarter points, for
    # evaluating an opposite cell's in-cell divergence polynomial.
    if k >= 1:
        n = g.size
        divtab = tuple(
            tuple(
                basis.table_2d(
                    k - 1,
                    np.repeat(g - hx, n),
                    np.tile(g - hy, n),
                ).reshape(-1, n, n)
                for hx in (0, 1)
            )
            for hy in (0, 1)
        )
    else:
        divtab = ((None, None), (None, None))

    cx, cy = gath(cen, mx), gath(cen, my)
    exm_, exp_ = gath(em, mx), gath(ep, mx)
    eym_, eyp_ = gath(em, my), gath(ep, my)

    def oflat(xv, yv):
        # (M, A) x (M, B) -> (M, A*B), point index ab = a*B + b
        return np.ascontiguousarray((xv[:, :, None] * yv[:, None, :]).reshape(xv.shape[0], -1))

    def wt(xv, yv):
        return oflat(xv, yv).T.copy()

    volW = tuple(
        tuple(
            np.concatenate([oflat(dgxo_w[hx], gyo_w[hy]), oflat(gxo_w[hx], dgyo_w[hy])], axis=1).T.copy()
            for hx in (0, 1)
        )
        for hy in (0, 1)
    )
    nq = g.size
    divTf = tuple(
        tuple(
            None if divtab[hy][hx] is None else np.ascontiguousarray(
                divtab[hy][hx].reshape(-1, nq * nq)
            )
            for hx in (0, 1)
        )
        for hy in (0, 1)
    )

    return Tables2D(
        w=w,
        gxo=gxo,
        gyo=gyo,
        gxo_w=gxo_w,
        gyo_w=gyo_w,
        dgxo_w=dgxo_w,
        dgyo_w=dgyo_w,
        gxp=gxp,
        gyp=gyp,
        cx=cx,
        cy=cy,
        exm=exm_,
        exp_=exp_,
        eym=eym_,
        eyp=eyp_,
        relax=relax,
        divtab=divtab,
        relaxT=tuple(tuple(relax[hy][hx].T.copy() for hx in (0, 1)) for hy in (0, 1)),
        volT=tuple(tuple(oflat(gxp[hx], gyp[hy]) for hx in (0, 1)) for hy in (0, 1)),
        volW=volW,
        srcW=tuple(tuple(wt(gxo_w[hx], gyo_w[hy]) for hx in (0, 1)) for hy in (0, 1)),
        divTf=divTf,
        xfT=tuple(np.ascontiguousarray(cx[:, None] * gyp[hy]) for hy in (0, 1)),
        xfWp=tuple((exp_[:, None] * gyo_w[hy]).T.copy() for hy in (0, 1)),
        xfWm=tuple((exm_[:, None] * gyo_w[hy]).T.copy() for hy in (0, 1)),
        yfT=tuple(np.ascontiguousarray(cy[:, None] * gxp[hx]) for hx in (0, 1)),
        yfWp=tuple((eyp_[:, None] * gxo_w[hx]).T.copy() for hx in (0, 1)),
        yfWm=tuple((eym_[:, None] * gxo_w[hx]).T.copy() for hx in (0, 1)),
        xsTp=tuple(np.ascontiguousarray(exm_[:, None] * gyp[hy]) for hy in (0, 1)),
        xsTm=tuple(np.ascontiguousarray(exp_[:, None] * gyp[hy]) for hy in (0, 1)),
        xsW=tuple((cx[:, None] * gyo_w[hy]).T.copy() for hy in (0, 1)),
        ysTp=tuple(np.ascontiguousarray(eym_[:, None] * gxp[hx]) for hx in (0, 1)),
        ysTm=tuple(np.ascontiguousarray(eyp_[:, None] * gxp[hx]) for hx in (0, 1)),
        ysW=tuple((cy[:, None] * gxo_w[hx]).T.copy() for hx in (0, 1)),
    )


def _check_points(U: np.ndarray, mesh: str, what: str) -> None:
    with np.errstate(invalid="ignore", over="ignore"):
        rho = U[..., RHO]
        e = internal_energy_density(U)
        bad = ~np.isfinite(e) | (rho <= 0.0) | (e <= 0.0)
    if bad.any():
        idx = tuple(int(t) for t in np.argwhere(bad)[0])
        r, val = float(rho[idx]), float(e[idx])
        constraint = "density > 0" if (not np.isfinite(r) or r <= 0.0) else "internal energy > 0"
        raise InadmissiblePoint(mesh, (what,) + idx, constraint, min(r, val))


def _raise_point(mesh: str, what: str, idx: tuple, code: int, val: float) -> None:
    constraint = "density > 0" if code == 0 else "internal energy > 0"
    raise InadmissiblePoint(mesh, (what,) + tuple(int(i) for i in idx), constraint, float(val))


@numba.njit(cache=True, inline="always")
def _badscan(U, i, P, F, two, bad_c, bad_p, code, val):
    """Slow path for one row that failed the bulk scan: locate the first bad
    point (column order) and zero every bad column so the weight contraction
    downstream never sees garbage.  Returns updated (bad_c, bad_p, code, val).
    """
    for j in range(P):
        rho = U[i, 0, j]
        good_rho = np.isfinite(rho) and rho > 0.0
        if good_rho:
            b2 = U[i, 4, j] ** 2 + U[i, 5, j] ** 2 + U[i, 6, j] ** 2
            m2 = U[i, 1, j] ** 2 + U[i, 2, j] ** 2 + U[i, 3, j] ** 2
            rho_e = U[i, 7, j] - 0.5 * m2 / rho - 0.5 * b2
        else:
            rho_e = -1.0
        if not (good_rho and np.isfinite(rho_e) and rho_e > 0.0):
            if bad_c < 0:
                bad_c = i
                bad_p = j
                code = 0 if not good_rho else 1
                val = rho if not good_rho else rho_e
            for q in range(8):
                F[i, q, j] = 0.0
                if two:
                    F[i, q, P + j] = 0.0
    return bad_c, bad_p, code, val


@numba.njit(cache=True, fastmath={"reassoc", "contract", "arcp"})
def _kflux2(U, c1, c2, gamma):
    """Scaled x and y fluxes of point states, fused with the admissibility scan.

    U is (n, 8, P).  Returns (F, bad_cell, bad_point, bad_code, bad_value)
    with F of shape (n, 8, 2P): c1 * F_x in [:, :, :P], c2 * F_y in the rest.
    bad_cell < 0 means every point passed; code 0 flags density, 1 energy;
    a non-finite bad_value means the state itself went non-finite.

    The point loop is branch-free (guarded density, badness folded into a
    row flag) so it vectorizes; rows that trip the flag take a scalar fixup
    pass that zeroes bad columns and pins the first offender.
    """
    n, _, P = U.shape
    F = np.empty((n, 8, 2 * P))
    bad_c = -1
    bad_p = -1
    code = 0
    val = 0.0
    gm1 = gamma - 1.0
    for i in range(n):
        rowbad = False
        for j in range(P):
            rho = U[i, 0, j]
            mx = U[i, 1, j]
            my = U[i, 2, j]
            mz = U[i, 3, j]
            bx = U[i, 4, j]
            by = U[i, 5, j]
            bz = U[i, 6, j]
            E = U[i, 7, j]
            okr = np.isfinite(rho) and rho > 0.0
            rs = rho if okr else 1.0
            inv = 1.0 / rs
            b2 = bx * bx + by * by + bz * bz
            rho_e = E - 0.5 * (mx * mx + my * my + mz * mz) * inv - 0.5 * b2
            rowbad |= not (okr and np.isfinite(rho_e) and rho_e > 0.0)
            jq = P + j
            vx = mx * inv
            vy = my * inv
            vz = mz * inv
            pt = gm1 * rho_e + 0.5 * b2
            vdB = vx * bx + vy * by + vz * bz
            Ept = E + pt
            F[i, 0, j] = c1 * mx
            F[i, 1, j] = c1 * (vx * mx - bx * bx + pt)
            F[i, 2, j] = c1 * (vx * my - bx * by)
            F[i, 3, j] = c1 * (vx * mz - bx * bz)
            F[i, 4, j] = 0.0
            F[i, 5, j] = c1 * (vx * by - bx * vy)
            F[i, 6, j] = c1 * (vx * bz - bx * vz)
            F[i, 7, j] = c1 * (vx * Ept - bx * vdB)
            F[i, 0, jq] = c2 * my
            F[i, 1, jq] = c2 * (vy * mx - by * bx)
            F[i, 2, jq] = c2 * (vy * my - by * by + pt)
            F[i, 3, jq] = c2 * (vy * mz - by * bz)
            F[i, 4, jq] = c2 * (vy * bx - by * vx)
            F[i, 5, jq] = 0.0
            F[i, 6, jq] = c2 * (vy * bz - by * vz)
            F[i, 7, jq] = c2 * (vy * Ept - by * vdB)
        if rowbad:
            bad_c, bad_p, code, val = _badscan(U, i, P, F, True, bad_c, bad_p, code, val)
    return F, bad_c, bad_p, code, val


@numba.njit(cache=True, fastmath={"reassoc", "contract", "arcp"})
def _kflux1(U, c, axis, gamma):
    """Scaled single-axis flux with the same fused scan as _kflux2.

    U is (n, 8, P); returns (F, bad_cell, bad_point, bad_code, bad_value)
    with F of shape (n, 8, P).  Same branch-free row structure as _kflux2.
    """
    n, _, P = U.shape
    F = np.empty((n, 8, P))
    bad_c = -1
    bad_p = -1
    code = 0
    val = 0.0
    gm1 = gamma - 1.0
    for i in range(n):
        rowbad = False
        for j in range(P):
            rho = U[i, 0, j]
            mx = U[i, 1, j]
            my = U[i, 2, j]
            mz = U[i, 3, j]
            bx = U[i, 4, j]
            by = U[i, 5, j]
            bz = U[i, 6, j]
            E = U[i, 7, j]
            okr = np.isfinite(rho) and rho > 0.0
            rs = rho if okr else 1.0
            inv = 1.0 / rs
            b2 = bx * bx + by * by + bz * bz
            rho_e = E - 0.5 * (mx * mx + my * my + mz * mz) * inv - 0.5 * b2
            rowbad |= not (okr and np.isfinite(rho_e) and rho_e > 0.0)
            vx = mx * inv
            vy = my * inv
            vz = mz * inv
            pt = gm1 * rho_e + 0.5 * b2
            vdB = vx * bx + vy * by + vz * bz
            Ept = E + pt
            if axis == 0:
                F[i, 0, j] = c * mx
                F[i, 1, j] = c * (vx * mx - bx * bx + pt)
                F[i, 2, j] = c * (vx * my - bx * by)
                F[i, 3, j] = c * (vx * mz - bx * bz)
                F[i, 4, j] = 0.0
                F[i, 5, j] = c * (vx * by - bx * vy)
                F[i, 6, j] = c * (vx * bz - bx * vz)
                F[i, 7, j] = c * (vx * Ept - bx * vdB)
            else:
                F[i, 0, j] = c * my
                F[i, 1, j] = c * (vy * mx - by * bx)
                F[i, 2, j] = c * (vy * my - by * by + pt)
                F[i, 3, j] = c * (vy * mz - by * bz)
                F[i, 4, j] = c * (vy * bx - by * vx)
                F[i, 5, j] = 0.0
                F[i, 6, j] = c * (vy * bz - by * vz)
                F[i, 7, j] = c * (vy * Ept - by * vdB)
        if rowbad:
            bad_c, bad_p, code, val = _badscan(U, i, P, F, False, bad_c, bad_p, code, val)
    return F, bad_c, bad_p, code, val


@numba.njit(cache=True)
def _kjump(vp, vm, comp, c):
    """Scaled jump-source integrand on segment traces, fused with the scan.

    vp and vm are (n, 8, P) one-sided trace states.  Returns (J, bad_cell,
    bad_point, bad_code, bad_value) with J[i, :, j] = c * (vp[comp] - vm[comp])
    * S(avg) where S(U) = (0, B, v, v.B) and avg is the trace midpoint
    (admissible by convexity once both traces pass).
    """
    n, _, P = vp.shape
    J = np.empty((n, 8, P))
    bad_c = -1
    bad_p = -1
    code = 0
    val = 0.0
    for i in range(n):
        for j in range(P):
            ok = True
            for s in range(2):
                arr = vp if s == 0 else vm
                rho = arr[i, 0, j]
                good_rho = np.isfinite(rho) and rho > 0.0
                if good_rho:
                    b2 = arr[i, 4, j] ** 2 + arr[i, 5, j] ** 2 + arr[i, 6, j] ** 2
                    m2 = arr[i, 1, j] ** 2 + arr[i, 2, j] ** 2 + arr[i, 3, j] ** 2
                    rho_e = arr[i, 7, j] - 0.5 * m2 / rho - 0.5 * b2
                else:
                    rho_e = -1.0
                if not (good_rho and np.isfinite(rho_e) and rho_e > 0.0):
                    if bad_c < 0:
                        bad_c = i
                        bad_p = j
                        code = 0 if not good_rho else 1
                        val = rho if not good_rho else rho_e
                    ok = False
            if not ok:
                for q in range(8):
                    J[i, q, j] = 0.0
                continue
            rho = 0.5 * (vp[i, 0, j] + vm[i, 0, j])
            mx = 0.5 * (vp[i, 1, j] + vm[i, 1, j])
            my = 0.5 * (vp[i, 2, j] + vm[i, 2, j])
            mz = 0.5 * (vp[i, 3, j] + vm[i, 3, j])
            bx = 0.5 * (vp[i, 4, j] + vm[i, 4, j])
            by = 0.5 * (vp[i, 5, j] + vm[i, 5, j])
            bz = 0.5 * (vp[i, 6, j] + vm[i, 6, j])
            inv = 1.0 / rho
            vx = mx * inv
            vy = my * inv
            vz = mz * inv
            jmp = c * (vp[i, comp, j] - vm[i, comp, j])
            J[i, 0, j] = 0.0
            J[i, 1, j] = jmp * bx
            J[i, 2, j] = jmp * by
            J[i, 3, j] = jmp * bz
            J[i, 4, j] = jmp * vx
            J[i, 5, j] = jmp * vy
            J[i, 6, j] = jmp * vz
            J[i, 7, j] = jmp * (vx * bx + vy * by + vz * bz)
    return J, bad_c, bad_p, code, val


@numba.njit(cache=True)
def _ksrc(U, wgt, c):
    """Weighted source direction c * wgt * S(U) at already-validated points.

    U is (n, 8, P), wgt (n, P); returns (n, 8, P).
    """
    n, _, P = U.shape
    out = np.empty((n, 8, P))
    for i in range(n):
        for j in range(P):
            a = c * wgt[i, j]
            inv = 1.0 / U[i, 0, j]
            vx = U[i, 1, j] * inv
            vy = U[i, 2, j] * inv
            vz = U[i, 3, j] * inv
            bx = U[i, 4, j]
            by = U[i, 5, j]
            bz = U[i, 6, j]
            out[i, 0, j] = 0.0
            out[i, 1, j] = a * bx
            out[i, 2, j] = a * by
            out[i, 3, j] = a * bz
            out[i, 4, j] = a * vx
            out[i, 5, j] = a * vy
            out[i, 6, j] = a * vz
            out[i, 7, j] = a * (vx * bx + vy * by + vz * bz)
    return out


def _mmul(block: np.ndarray, table: np.ndarray) -> np.ndarray:
    """(n1, n2, 8, M) x (M, P) -> (n1, n2, 8, P) as one flat GEMM."""
    n1, n2, q, m = block.shape
    flat = np.ascontiguousarray(block).reshape(n1 * n2 * q, m)
    return (flat @ table).reshape(n1, n2, q, table.shape[1])


def _vside(opp: np.ndarray, n1: int, n2: int, hy: int, t: Tables2D):
    """One-sided values on the vertical opposite-interfaces inside own cells.

    Returns (plus, minus), each (n1, n2, N, 8): the east and west limits of
    the opposite field at own cell's x-center segment, transverse half hy.
    """
    rows = opp[hy : hy + n1, :]
    vm = np.einsum("rcqm,m,mb->rcbq", rows[:, :n2], t.exp_, t.gyp[hy], optimize=True)
    vp = np.einsum("rcqm,m,mb->rcbq", rows[:, 1 : n2 + 1], t.exm, t.gyp[hy], optimize=True)
    return vp, vm


def _hside(opp: np.ndarray, n1: int, n2: int, hx: int, t: Tables2D):
    """Horizontal-segment mirror of _vside: north and south limits."""
    cols = opp[:, hx : hx + n2]
    vm = np.einsum("rcqm,ma,m->rcaq", cols[:n1], t.gxp[hx], t.eyp, optimize=True)
    vp = np.einsum("rcqm,ma,m->rcaq", cols[1 : n1 + 1], t.gxp[hx], t.eym, optimize=True)
    return vp, vm


def _one_side(
    own: np.ndarray,
    opp: np.ndarray,
    dx: float,
    dy: float,
    tau: float,
    k: int,
    eos: IdealGas,
    mesh: str,
    jump_source: bool,
    volume_source: bool,
) -> np.ndarray:
    t = tables_2d(k)
    gamma = eos.gamma
    n1, n2 = own.shape[:2]
    nm = own.shape[-1]
    nb = t.gyp[0].shape[1]
    out = -own / tau
    acc = np.zeros_like(own)
    c1, c2 = 0.5 / dx, 0.5 / dy

    divc = None
    if volume_source and k >= 1:
        dmat = basis.divergence_matrix(k, dx, dy)
        pair = np.concatenate([opp[..., BX, :], opp[..., BY, :]], axis=-1)
        divc = pair @ dmat.T

    # Everything runs over row blocks so each modes -> points -> weights
    # pipeline stays cache resident; full-array passes went to DRAM four
    # times per quarter and dominated the step cost on fine meshes.
    rb = max(1, 1024 // n2)
    for r0 in range(0, n1, rb):
        r1 = min(n1, r0 + rb)
        nr = r1 - r0
        nc = nr * n2
        for hy in (0, 1):
            for hx in (0, 1):
                block = np.ascontiguousarray(opp[r0 + hy : r1 + hy, hx : hx + n2]).reshape(-1, nm)
                out[r0:r1] += ((block @ t.relaxT[hy][hx]) / tau).reshape(nr, n2, 8, nm)
                U = (block @ t.volT[hy][hx]).reshape(nc, 8, -1)
                F, bc, bp, code, val = _kflux2(U, c1, c2, gamma)
                if bc >= 0:
                    _raise_point(
                        mesh, "volume", (r0 + bc // n2, bc % n2, bp // nb, bp % nb), code, val
                    )
                acc[r0:r1] += (F.reshape(nc * 8, -1) @ t.volW[hy][hx]).reshape(nr, n2, 8, nm)
                if divc is not None:
                    dvb = np.ascontiguousarray(divc[r0 + hy : r1 + hy, hx : hx + n2]).reshape(nc, -1)
                    dv = dvb @ t.divTf[hy][hx]
                    S = _ksrc(U, dv, -0.25)
                    acc[r0:r1] += (S.reshape(nc * 8, -1) @ t.srcW[hy][hx]).reshape(nr, n2, 8, nm)

        for hy in (0, 1):
            v = _mmul(opp[r0 + hy : r1 + hy, :], t.xfT[hy])
            Fv, bc, bp, code, val = _kflux1(v.reshape(nr * (n2 + 1), 8, -1), c1, 0, gamma)
            if bc >= 0:
                _raise_point(mesh, "x-face", (r0 + bc // (n2 + 1), bc % (n2 + 1), bp), code, val)
            Fv = Fv.reshape(nr, n2 + 1, 8, -1)
            acc[r0:r1] -= _mmul(Fv[:, 1:], t.xfWp[hy])
            acc[r0:r1] += _mmul(Fv[:, :-1], t.xfWm[hy])

        for hx in (0, 1):
            v = _mmul(opp[r0 : r1 + 1, hx : hx + n2], t.yfT[hx])
            Fv, bc, bp, code, val = _kflux1(v.reshape((nr + 1) * n2, 8, -1), c2, 1, gamma)
            if bc >= 0:
                _raise_point(mesh, "y-face", (r0 + bc // n2, bc % n2, bp), code, val)
            Fv = Fv.reshape(nr + 1, n2, 8, -1)
            acc[r0:r1] -= _mmul(Fv[1:], t.yfWp[hx])
            acc[r0:r1] += _mmul(Fv[:-1], t.yfWm[hx])

        if jump_source:
            for hy in (0, 1):
                rows = opp[r0 + hy : r1 + hy]
                vm = _mmul(rows[:, :n2], t.xsTm[hy]).reshape(nc, 8, -1)
                vp = _mmul(rows[:, 1 : n2 + 1], t.xsTp[hy]).reshape(nc, 8, -1)
                J, bc, bp, code, val = _kjump(vp, vm, BX, -c1)
                if bc >= 0:
                    _raise_point(mesh, "x-segment", (r0 + bc // n2, bc % n2, bp), code, val)
                acc[r0:r1] += (J.reshape(nc * 8, -1) @ t.xsW[hy]).reshape(nr, n2, 8, nm)
            for hx in (0, 1):
                cols = opp[r0 : r1 + 1, hx : hx + n2]
                vm = _mmul(cols[:nr], t.ysTm[hx]).reshape(nc, 8, -1)
                vp = _mmul(cols[1 : nr + 1], t.ysTp[hx]).reshape(nc, 8, -1)
                J, bc, bp, code, val = _kjump(vp, vm, BY, -c2)
                if bc >= 0:
                    _raise_point(mesh, "y-segment", (r0 + bc // n2, bc % n2, bp), code, val)
                acc[r0:r1] += (J.reshape(nc * 8, -1) @ t.ysW[hx]).reshape(nr, n2, 8, nm)

    return out + acc


def _df_guard(field: Field2D, mesh: str) -> None:
    if field.k == 0:
        return
    dmat = basis.divergence_matrix(field.k, field.mesh.dx, field.mesh.dy)
    arr = field.interior
    pair = np.concatenate([arr[..., BX, :], arr[..., BY, :]], axis=-1)
    divc = pair @ dmat.T
    worst = float(np.abs(divc).max())
    if worst > DIV_GUARD:
        idx = np.unravel_index(int(np.abs(divc).argmax()), divc.shape)
        raise InadmissiblePoint(mesh, tuple(int(i) for i in idx), "in-cell divergence == 0", worst)


def _project_df(res: np.ndarray, proj: np.ndarray) -> None:
    m = res.shape[-1]
    pair = np.concatenate([res[..., BX, :], res[..., BY, :]], axis=-1)
    pair = pair @ proj.T
    res[..., BX, :] = pair[..., :m]
    res[..., BY, :] = pair[..., m:]


def residual_2d_standard(
    primal: Field2D,
    dual: Field2D,
    eos: IdealGas,
    tau_max: float,
    volume_source: bool = False,
) -> Residual2D:
    """Residual of the conservative two-mesh scheme, both update directions.

    Ghost cells of the primal field must be filled.  Constant-mode rows are
    the cell-average evolution operators; higher rows add the volume and
    relaxation quadrature against each test mode.
    """
    mesh = primal.mesh
    rp = _one_side(
        primal.interior, dual.coeffs, mesh.dx, mesh.dy, tau_max, primal.k, eos,
        "primal", jump_source=False, volume_source=volume_source,
    )
    rd = _one_side(
        dual.coeffs, primal.coeffs, mesh.dx, mesh.dy, tau_max, primal.k, eos,
        "dual", jump_source=False, volume_source=volume_source,
    )
    return Residual2D(rp, rd)


def residual_2d_locally_df(
    primal: Field2D,
    dual: Field2D,
    eos: IdealGas,
    tau_max: float,
    source: bool = True,
) -> Residual2D:
    """Residual of the jump-source scheme on locally solenoidal fields.

    Verifies the in-cell divergence contract on both inputs, assembles the
    standard terms plus the interior segment sources, then projects the
    in-plane magnetic rows back onto the solenoidal pair space so the
    represented fields stay in it under any explicit update.  The projection
    leaves constant modes untouched, so cell-average updates are exactly the
    source-augmented average operators.
    """
    mesh = primal.mesh
    _df_guard(primal, "primal")
    _df_guard(dual, "dual")
    rp = _one_side(
        primal.interior, dual.coeffs, mesh.dx, mesh.dy, tau_max, primal.k, eos,
        "primal", jump_source=source, volume_source=False,
    )
    rd = _one_side(
        dual.coeffs, primal.coeffs, mesh.dx, mesh.dy, tau_max, primal.k, eos,
        "dual", jump_source=source, volume_source=False,
    )
    if primal.k >= 1:
        proj = basis.solenoidal_projector(primal.k, mesh.dx, mesh.dy)
        _project_df(rp, proj)
        _project_df(rd, proj)
    return Residual2D(rp, rd)


def _face_diff_sum(opp: np.ndarray, n1: int, n2: int, comp: int, t: Tables2D, axis: int) -> np.ndarray:
    """Gauss-summed normal-component face differences for (4.x)-style sums."""
    w = t.w
    out = np.zeros((n1, n2))
    if axis == 0:
        for hy in (0, 1):
            v = np.einsum(
                "rcm,m,mb->rcb", opp[hy : hy + n1, :, comp], t.cx, t.gyp[hy], optimize=True
            )
            out += 0.5 * (v[:, 1:] - v[:, :-1]) @ w
    else:
        for hx in (0, 1):
            v = np.einsum(
                "rcm,ma,m->rca", opp[:, hx : hx + n2, comp], t.gxp[hx], t.cy, optimize=True
            )
            out += 0.5 * (v[1:] - v[:-1]) @ w
    return out


def discrete_div_primal(dual: Field2D, i: int | None = None, j: int | None = None):
    """Face-sum divergence of the dual magnetic field over primal cells.

    Without indices returns the full (ny, nx) array; with (i, j) the scalar
    for primal cell column i, row j (0-based interior numbering).
    """
    t = tables_2d(dual.k)
    mesh = dual.mesh
    n1, n2 = mesh.ny, mesh.nx
    arr = _face_diff_sum(dual.coeffs, n1, n2, BX, t, 0) / mesh.dx
    arr += _face_diff_sum(dual.coeffs, n1, n2, BY, t, 1) / mesh.dy
    return arr if i is None else float(arr[j, i])


def discrete_div_dual(primal: Field2D, i: int | None = None, j: int | None = None):
    """Mirror of discrete_div_primal: primal field over dual cells."""
    t = tables_2d(primal.k)
    mesh = primal.mesh
    n1, n2 = mesh.ny + 1, mesh.nx + 1
    arr = _face_diff_sum(primal.coeffs, n1, n2, BX, t, 0) / mesh.dx
    arr += _face_diff_sum(primal.coeffs, n1, n2, BY, t, 1) / mesh.dy
    return arr if i is None else float(arr[j, i])


def _jump_sum(opp: np.ndarray, n1: int, n2: int, comp: int, t: Tables2D, axis: int) -> np.ndarray:
    w = t.w
    out = np.zeros((n1, n2))
    if axis == 0:
        for hy in (0, 1):
            vp, vm = _vside(opp, n1, n2, hy, t)
            out += 0.5 * (vp[..., comp] - vm[..., comp]) @ w
    else:
        for hx in (0, 1):
            vp, vm = _hside(opp, n1, n2, hx, t)
            out += 0.5 * (vp[..., comp] - vm[..., comp]) @ w
    return out


def tilde_div_primal(dual: Field2D, i: int | None = None, j: int | None = None):
    """Interior-jump divergence of the dual field over primal cells.

    Agrees with discrete_div_primal whenever the dual field is locally
    solenoidal (per-quarter divergence theorem).
    """
    t = tables_2d(dual.k)
    mesh = dual.mesh
    n1, n2 = mesh.ny, mesh.nx
    arr = _jump_sum(dual.coeffs, n1, n2, BX, t, 0) / mesh.dx
    arr += _jump_sum(dual.coeffs, n1, n2, BY, t, 1) / mesh.dy
    return arr if i is None else float(arr[j, i])


def tilde_div_dual(primal: Field2D, i: int | None = None, j: int | None = None):
    t = tables_2d(primal.k)
    mesh = primal.mesh
    n1, n2 = mesh.ny + 1, mesh.nx + 1
    arr = _jump_sum(primal.coeffs, n1, n2, BX, t, 0) / mesh.dx
    arr += _jump_sum(primal.coeffs, n1, n2, BY, t, 1) / mesh.dy
    return arr if i is None else float(arr[j, i])


@numba.njit(cache=True, inline="always")
def _palpha(r1, mx1, my1, mz1, bx1, by1, bz1, E1,
            r2, mx2, my2, mz2, bx2, by2, bz2, E2, gamma, axis):
    # pairwise speed bound; algebra mirrors physics.pairwise_wave_speed
    sq1 = np.sqrt(r1)
    sq2 = np.sqrt(r2)
    b21 = bx1 * bx1 + by1 * by1 + bz1 * bz1
    b22 = bx2 * bx2 + by2 * by2 + bz2 * bz2
    e1 = E1 - 0.5 * (mx1 * mx1 + my1 * my1 + mz1 * mz1) / r1 - 0.5 * b21
    e2 = E2 - 0.5 * (mx2 * mx2 + my2 * my2 + mz2 * mz2) / r2 - 0.5 * b22
    p1 = (gamma - 1.0) * e1
    p2 = (gamma - 1.0) * e2
    cs21 = p1 * p1 / (2.0 * r1 * e1)
    cs22 = p2 * p2 / (2.0 * r2 * e2)
    if axis == 0:
        vi1, vi2, bi1, bi2 = mx1 / r1, mx2 / r2, bx1, bx2
    else:
        vi1, vi2, bi1, bi2 = my1 / r1, my2 / r2, by1, by2
    a1 = b21 / r1 + cs21
    a2 = b22 / r2 + cs22
    d1 = a1 * a1 - 4.0 * bi1 * bi1 * cs21 / r1
    d2 = a2 * a2 - 4.0 * bi2 * bi2 * cs22 / r2
    cf1 = np.sqrt(0.5 * (a1 + np.sqrt(max(d1, 0.0))))
    cf2 = np.sqrt(0.5 * (a2 + np.sqrt(max(d2, 0.0))))
    cmax = cf1 if cf1 > cf2 else cf2
    roe = abs(sq1 * vi1 + sq2 * vi2) / (sq1 + sq2) + cmax
    base = abs(vi1) + cf1
    o2 = abs(vi2) + cf2
    if o2 > base:
        base = o2
    if roe > base:
        base = roe
    dbx = bx1 - bx2
    dby = by1 - by2
    dbz = bz1 - bz2
    dB = np.sqrt(dbx * dbx + dby * dby + dbz * dbz)
    return base + dB / (sq1 + sq2)


@numba.njit(cache=True)
def _kspeed(v, gamma, axis, pair_rows):
    """Max pairwise speed over adjacent cell pairs of a face-value lattice.

    v is (n1, n2, 8, P); pairs run along rows when pair_rows else columns.
    NaNs propagate into the returned maximum.
    """
    n1, n2, _, P = v.shape
    worst = 0.0
    r1 = n1 - 1 if pair_rows else n1
    c1 = n2 if pair_rows else n2 - 1
    for r in range(r1):
        for c in range(c1):
            for j in range(P):
                if pair_rows:
                    a = _palpha(
                        v[r + 1, c, 0, j], v[r + 1, c, 1, j], v[r + 1, c, 2, j],
                        v[r + 1, c, 3, j], v[r + 1, c, 4, j], v[r + 1, c, 5, j],
                        v[r + 1, c, 6, j], v[r + 1, c, 7, j],
                        v[r, c, 0, j], v[r, c, 1, j], v[r, c, 2, j], v[r, c, 3, j],
                        v[r, c, 4, j], v[r, c, 5, j], v[r, c, 6, j], v[r, c, 7, j],
                        gamma, axis,
                    )
                else:
                    a = _palpha(
                        v[r, c + 1, 0, j], v[r, c + 1, 1, j], v[r, c + 1, 2, j],
                        v[r, c + 1, 3, j], v[r, c + 1, 4, j], v[r, c + 1, 5, j],
                        v[r, c + 1, 6, j], v[r, c + 1, 7, j],
                        v[r, c, 0, j], v[r, c, 1, j], v[r, c, 2, j], v[r, c, 3, j],
                        v[r, c, 4, j], v[r, c, 5, j], v[r, c, 6, j], v[r, c, 7, j],
                        gamma, axis,
                    )
                if not a <= worst:
                    worst = a
    return worst


@numba.njit(cache=True)
def _kbeta(vp, vm, comp):
    """Max normal-component jump ratio |[B_n]| / (2 sqrt(rho_mid)) over traces."""
    n, _, P = vp.shape
    worst = 0.0
    for i in range(n):
        for j in range(P):
            rho = 0.5 * (vp[i, 0, j] + vm[i, 0, j])
            ratio = abs(vp[i, comp, j] - vm[i, comp, j]) / (2.0 * np.sqrt(rho))
            if not ratio <= worst:
                worst = ratio
    return worst


def wave_speeds_2d(
    primal: Field2D,
    dual: Field2D,
    eos: IdealGas,
    variant: SchemeVariant = LOCALLY_DF_PP,
) -> tuple[float, float, float, float, float, float]:
    """(a1, a2, ahat1, ahat2, beta1, beta2) for the step-size conditions.

    ahat pairs each cell's two opposite-mesh face-line values (the two flux
    arguments of its average update) at the transverse Gauss points; beta
    scans the interior-interface jumps of the normal magnetic component.
    The step speeds a are beta-augmented only for the locally-DF variant.
    Primal ghosts must be filled.
    """
    t = tables_2d(primal.k)
    mesh = primal.mesh
    ny, nx = mesh.ny, mesh.nx
    P, D = primal.coeffs, dual.coeffs
    gamma = eos.gamma

    ahat = []
    for axis in (0, 1):
        worst = 0.0
        for h in (0, 1):
            if axis == 0:
                vd = _mmul(D[h : h + ny, :], t.xfT[h])
                vpr = _mmul(P[h : h + ny + 1, :], t.xfT[h])
                pair_rows = False
            else:
                vd = _mmul(D[:, h : h + nx], t.yfT[h])
                vpr = _mmul(P[:, h : h + nx + 1], t.yfT[h])
                pair_rows = True
            worst = max(worst, _kspeed(vd, gamma, axis, pair_rows))
            worst = max(worst, _kspeed(vpr, gamma, axis, pair_rows))
        ahat.append(worst)

    betas = []
    for axis, comp in ((0, BX), (1, BY)):
        worst = 0.0
        for h in (0, 1):
            if axis == 0:
                for opp, m1, m2 in ((D, ny, nx), (P, ny + 1, nx + 1)):
                    rows = opp[h : h + m1]
                    vm = _mmul(rows[:, :m2], t.xsTm[h]).reshape(m1 * m2, 8, -1)
                    vp = _mmul(rows[:, 1 : m2 + 1], t.xsTp[h]).reshape(m1 * m2, 8, -1)
                    worst = max(worst, _kbeta(vp, vm, comp))
            else:
                for opp, m1, m2 in ((D, ny, nx), (P, ny + 1, nx + 1)):
                    cols = opp[:, h : h + m2]
                    vm = _mmul(cols[:m1], t.ysTm[h]).reshape(m1 * m2, 8, -1)
                    vp = _mmul(cols[1 : m1 + 1], t.ysTp[h]).reshape(m1 * m2, 8, -1)
                    worst = max(worst, _kbeta(vp, vm, comp))
        betas.append(worst)

    ahat1, ahat2 = ahat
    beta1, beta2 = betas
    if not all(np.isfinite([ahat1, ahat2, beta1, beta2])):
        raise InadmissiblePoint("both", ("wave-speed",), "finite signal speed", float("nan"))
    if variant.locally_df:
        return max(ahat1, beta1), max(ahat2, beta2), ahat1, ahat2, beta1, beta2
    return ahat1, ahat2, ahat1, ahat2, beta1, beta2


def eps_div(primal: Field2D, periodic_x: bool = False, periodic_y: bool = False) -> float:
    """Global relative divergence error of the primal magnetic field.

    Numerator: interface integrals of |normal-component jump| plus cell
    integrals of |in-cell divergence|; denominator: same-structure integrals
    of the field magnitude.  Wrap interfaces are counted once when the axis
    is periodic.  Returns 0 for an identically zero field.
    """
    t = tables_2d(primal.k)
    mesh = primal.mesh
    own = primal.interior
    w = t.w
    k = primal.k

    num = 0.0
    den = 0.0
    bmag = lambda u: np.sqrt(u[..., BX] ** 2 + u[..., BY] ** 2 + u[..., BX + 2] ** 2)

    for h in (0, 1):
        right = np.einsum("rcqm,m,mb->rcbq", own, t.exp_, t.gyo[h], optimize=True)
        left = np.einsum("rcqm,m,mb->rcbq", own, t.exm, t.gyo[h], optimize=True)
        lnext = np.roll(left, -1, axis=1)
        take = slice(None) if periodic_x else slice(0, mesh.nx - 1)
        jump = np.abs(right[:, take, :, BX] - lnext[:, take, :, BX])
        mag = 0.5 * (bmag(right[:, take]) + bmag(lnext[:, take]))
        num += 0.5 * mesh.dy * float((jump @ w).sum())
        den += 0.5 * mesh.dy * float((mag @ w).sum())

        top = np.einsum("rcqm,ma,m->rcaq", own, t.gxo[h], t.eyp, optimize=True)
        bot = np.einsum("rcqm,ma,m->rcaq", own, t.gxo[h], t.eym, optimize=True)
        bnext = np.roll(bot, -1, axis=0)
        take = slice(None) if periodic_y else slice(0, mesh.ny - 1)
        jump = np.abs(top[take, ..., BY] - bnext[take, ..., BY])
        mag = 0.5 * (bmag(top[take]) + bmag(bnext[take]))
        num += 0.5 * mesh.dx * float((jump @ w).sum())
        den += 0.5 * mesh.dx * float((mag @ w).sum())

    divc = None
    if k >= 1:
        dmat = basis.divergence_matrix(k, mesh.dx, mesh.dy)
        pair = np.concatenate([own[..., BX, :], own[..., BY, :]], axis=-1)
        divc = pair @ dmat.T
    cellw = 0.25 * mesh.dx * mesh.dy
    for hy in (0, 1):
        for hx in (0, 1):
            u = np.einsum("rcqm,ma,mb->rcabq", own, t.gxo[hx], t.gyo[hy], optimize=True)
            den += cellw * float(np.einsum("rcab,a,b->", bmag(u), w, w, optimize=True))
            if divc is not None:
                dv = np.einsum("rcp,pab->rcab", divc, t.divtab[hy][hx], optimize=True)
                num += cellw * float(np.einsum("rcab,a,b->", np.abs(dv), w, w, optimize=True))

    return num / den if den > 0.0 else 0.0


def divergence_report(primal: Field2D, dual: Field2D, periodic_x: bool = False, periodic_y: bool = False) -> DivergenceReport:
    return DivergenceReport(
        div_primal=discrete_div_primal(dual),
        div_dual=discrete_div_dual(primal),
        tilde_primal=tilde_div_primal(dual),
        tilde_dual=tilde_div_dual(primal),
        eps=eps_div(primal, periodic_x, periodic_y),
    )


# --------------------------------------------------------------------------
# driver


from dataclasses import field as dc_field

from .field import fill_ghosts_2d
from .limiter import control_points_2d, limit_blocks
from .mesh import Boundary, Mesh2D, check_periodic_pairing
from .timeloop import StepRecord, Violation, advance_step


@dataclass
class Scheme2D:
    """Driver owning both fields, the boundary set, and stepping controls.

    bcs maps side names (left, right, bottom, top) to Boundary values.
    debug_pp turns stage-average violations into immediate exceptions with
    the offending mesh and cell, instead of walking the retry ladder.
    """

    mesh: Mesh2D
    k: int
    eos: IdealGas
    bcs: dict[str, Boundary]
    variant: SchemeVariant = LOCALLY_DF_PP
    theta: float = 1.0
    cfl: float = 0.25
    use_practical_dt: bool = True
    debug_pp: bool = False
    t: float = 0.0
    primal: Field2D = dc_field(init=False)
    dual: Field2D = dc_field(init=False)

    def __post_init__(self) -> None:
        missing = {"left", "right", "bottom", "top"} - set(self.bcs)
        if missing:
            raise ValueError(f"boundary set is missing sides: {sorted(missing)}")
        check_periodic_pairing(self.bcs)
        self.primal = Field2D.zeros(self.mesh, self.k)
        self.dual = Field2D.zeros(self.mesh, self.k, dual=True)

    @property
    def periodic_x(self) -> bool:
        return self.bcs["left"].kind == "periodic"

    @property
    def periodic_y(self) -> bool:
        return self.bcs["bottom"].kind == "periodic"

    def _sync_straddlers(self, d: np.ndarray) -> None:
        # On a periodic axis the two straddling dual layers are one physical
        # cell; one copy keeps them bitwise twins forever after, because every
        # later stage feeds both the same values.
        if self.periodic_x:
            d[:, -1] = d[:, 0]
        if self.periodic_y:
            d[-1, :] = d[0, :]

    def set_initial(self, fn) -> None:
        self.primal.project(fn)
        self.dual.project(fn, wrap_x=self.periodic_x, wrap_y=self.periodic_y)
        if self.variant.locally_df:
            self.primal.apply_df_projection()
            self.dual.apply_df_projection()
        self._sync_straddlers(self.dual.coeffs)
        viol = self._limit([self.primal.coeffs, self.dual.coeffs], stage=-1)[0]
        if viol is not None:
            raise ValueError(f"initial data has inadmissible cell averages ({viol.mesh} {viol.cell})")

    def _fill(self, primal_coeffs: np.ndarray) -> None:
        shell = Field2D(self.mesh, self.k, False, primal_coeffs)
        fill_ghosts_2d(shell, self.bcs)

    def rhs_for(self, dt: float):
        tau = dt / self.theta

        def rhs(arrays):
            p_full, d_all = arrays
            self._fill(p_full)
            pf = Field2D(self.mesh, self.k, False, p_full)
            df_ = Field2D(self.mesh, self.k, True, d_all)
            if self.variant.locally_df:
                res = residual_2d_locally_df(pf, df_, self.eos, tau, source=self.variant.source)
            else:
                res = residual_2d_standard(pf, df_, self.eos, tau, volume_source=self.variant.source)
            rp_full = np.zeros_like(p_full)
            rp_full[1:-1, 1:-1] = res.primal
            return rp_full, res.dual

        return rhs

    def _average_violation(self, blocks: np.ndarray, mesh: str, stage: int) -> Violation | None:
        ok = admissible(blocks[..., 0])
        if ok.all():
            return None
        cell = int(np.argwhere(~ok.reshape(-1))[0][0])
        return Violation(mesh, stage, cell)

    def _limit(self, arrays, stage: int):
        p_full, d_all = arrays
        if not self.variant.limiter:
            viol = self._average_violation(p_full[1:-1, 1:-1], "primal", stage)
            if viol is None:
                viol = self._average_violation(d_all, "dual", stage)
            if viol is not None and self.debug_pp:
                raise InadmissiblePoint(viol.mesh, ("stage", stage, viol.cell), "admissible cell average", float("nan"))
            return viol, 0, 1.0
        tab = control_points_2d(self.k)
        for mesh, block in (("primal", p_full[1:-1, 1:-1]), ("dual", d_all)):
            res = limit_blocks(block, tab)
            if not res.ok:
                if self.debug_pp:
                    raise InadmissiblePoint(
                        mesh, ("stage", stage, res.bad_cell), "admissible cell average", float("nan")
                    )
                return Violation(mesh, stage, res.bad_cell), 0, 1.0
            if mesh == "primal":
                limited, scale = res.limited, res.min_scale
            else:
                limited += res.limited
                scale = min(scale, res.min_scale)
        return None, limited, scale

    def signal_speeds(self) -> tuple[float, float, float, float, float, float]:
        self._fill(self.primal.coeffs)
        return wave_speeds_2d(self.primal, self.dual, self.eos, self.variant)

    def dt_theory(self, a1: float, a2: float) -> float:
        w1 = build_quadrature(self.k).first_lobatto_weight
        return 0.5 * self.theta * w1 / (a1 / self.mesh.dx + a2 / self.mesh.dy)

    def dt_practical(self, a1: float, a2: float) -> float:
        return self.cfl / (a1 / self.mesh.dx + a2 / self.mesh.dy)

    def step(self, t_end: float) -> StepRecord:
        a1, a2 = self.signal_speeds()[:2]
        state = [self.primal.coeffs, self.dual.coeffs]
        new, rec = advance_step(
            state, self.t, t_end,
            (self.dt_practical(a1, a2), self.dt_theory(a1, a2)),
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

    def totals(self) -> np.ndarray:
        """Combined conserved totals; exact bookkeeping on periodic domains.

        Straddling dual layers are half-weighted per periodic axis so each
        physical cell counts once.
        """
        cellw = self.mesh.dx * self.mesh.dy
        tot = self.primal.averages.sum(axis=(0, 1)) * cellw
        wx = np.ones(self.mesh.nx + 1)
        wy = np.ones(self.mesh.ny + 1)
        if self.periodic_x:
            wx[0] = wx[-1] = 0.5
        if self.periodic_y:
            wy[0] = wy[-1] = 0.5
        wt = wy[:, None] * wx[None, :]
        tot += (self.dual.averages * wt[..., None]).sum(axis=(0, 1)) * cellw
        return tot

    def eps_div_now(self) -> float:
        return eps_div(self.primal, self.periodic_x, self.periodic_y)

"""Modal coefficient storage for fields on the overlapping grids.

A field is an array of per-cell modal coefficient blocks, shape
(..., 8, M): eight conserved components, M orthonormal Legendre modes.
Mode 0 of every block is the cell average, because the basis is
orthonormal under the cell-average inner product and its first member is
the constant 1.

Primal fields carry a one-cell ghost ring (the only halo the scheme
needs); dual fields carry none.  Initial data is set by quadrature
projection with positive weights, so every projected cell average is a
convex combination of pointwise states and inherits their admissibility.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre

from . import basis
from .mesh import Boundary, Mesh1D, Mesh2D, _reflect_signs, check_periodic_pairing
from .physics import BX, BY, NCOMP


def _wrap_into(pts: np.ndarray, lo: float, hi: float) -> np.ndarray:
    # Shift only out-of-range points by one period; in-range values are
    # untouched so interior quadrature stays bitwise identical.
    length = hi - lo
    pts = pts.copy()
    pts[pts < lo] += length
    pts[pts > hi] -= length
    return pts


@dataclass
class Field1D:
    mesh: Mesh1D
    k: int
    dual: bool
    coeffs: np.ndarray

    @classmethod
    def zeros(cls, mesh: Mesh1D, k: int, dual: bool = False) -> "Field1D":
        m = basis.n_modes_1d(k)
        n = mesh.nx + 1 if dual else mesh.nx + 2
        return cls(mesh, k, dual, np.zeros((n, NCOMP, m)))

    @property
    def interior(self) -> np.ndarray:
        """Coefficient blocks without ghosts: (ncells, 8, M)."""
        return self.coeffs if self.dual else self.coeffs[1:-1]

    @property
    def averages(self) -> np.ndarray:
        return self.interior[..., 0]

    def centers(self) -> np.ndarray:
        return self.mesh.dual_centers() if self.dual else self.mesh.primal_centers()

    def copy(self) -> "Field1D":
        return Field1D(self.mesh, self.k, self.dual, self.coeffs.copy())

    def project(self, fn, wrap: bool = False, df_fix: bool = False) -> None:
        """Project fn(x) -> (n, 8) onto the modal basis, cell by cell.

        wrap folds quadrature points of boundary-straddling dual cells
        back into the domain (periodic runs).  df_fix then truncates the
        normal magnetic field to its cell constant, the one-dimensional
        form of a locally solenoidal polynomial.
        """
        nq = self.k + 3
        xg, wg = legendre.leggauss(nq)
        w = wg / 2.0
        tab = basis.table_1d(self.k, xg)
        pts = self.centers()[:, None] + 0.5 * self.mesh.dx * xg[None, :]
        if wrap:
            pts = _wrap_into(pts, self.mesh.x0, self.mesh.x1)
        vals = np.asarray(fn(pts.ravel()), dtype=float)
        nc = pts.shape[0]
        if vals.shape != (nc * nq, NCOMP):
            raise ValueError("initial-data callable must return (n, 8) states")
        self.interior[:] = np.einsum(
            "mq,q,cqs->csm", tab, w, vals.reshape(nc, nq, NCOMP), optimize=True
        )
        if df_fix:
            self.interior[:, BX, 1:] = 0.0

    def evaluate(self, x, cells=None) -> np.ndarray:
        """Field values at points x inside the grid's cover, (n, 8).

        cells pins each point to a cell index, which picks a side for
        points sitting exactly on an interface (one-sided evaluation).
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        dx = self.mesh.dx
        tol = 1e-10 * dx
        if self.dual:
            lo, hi = self.mesh.x0 - 0.5 * dx, self.mesh.x1 + 0.5 * dx
            top = self.mesh.nx
        else:
            lo, hi = self.mesh.x0, self.mesh.x1
            top = self.mesh.nx - 1
        if np.any(x < lo - tol) or np.any(x > hi + tol):
            raise ValueError("evaluation point outside the grid cover")
        if cells is None:
            shift = 0.5 if self.dual else 0.0
            idx = np.floor((x - self.mesh.x0) / dx + shift).astype(np.int64)
            idx = np.clip(idx, 0, top)
        else:
            idx = np.broadcast_to(np.asarray(cells, dtype=np.int64), x.shape)
        xi = np.clip((x - self.centers()[idx]) * (2.0 / dx), -1.0, 1.0)
        tab = basis.table_1d(self.k, xi)
        return np.einsum("ncm,mn->nc", self.interior[idx], tab, optimize=True)


@dataclass
class Field2D:
    mesh: Mesh2D
    k: int
    dual: bool
    coeffs: np.ndarray

    @classmethod
    def zeros(cls, mesh: Mesh2D, k: int, dual: bool = False) -> "Field2D":
        m = basis.n_modes_2d(k)
        if dual:
            shape = (mesh.ny + 1, mesh.nx + 1, NCOMP, m)
        else:
            shape = (mesh.ny + 2, mesh.nx + 2, NCOMP, m)
        return cls(mesh, k, dual, np.zeros(shape))

    @property
    def interior(self) -> np.ndarray:
        """Coefficient blocks without ghosts: (nrows, ncols, 8, M)."""
        return self.coeffs if self.dual else self.coeffs[1:-1, 1:-1]

    @property
    def averages(self) -> np.ndarray:
        return self.interior[..., 0]

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        return self.mesh.dual_centers() if self.dual else self.mesh.primal_centers()

    def copy(self) -> "Field2D":
        return Field2D(self.mesh, self.k, self.dual, self.coeffs.copy())

    def project(
        self,
        fn,
        wrap_x: bool = False,
        wrap_y: bool = False,
        df_fix: bool = False,
    ) -> None:
        """Project fn(x, y) -> (n, 8) onto the modal basis, cell by cell.

        df_fix applies the solenoidal projector to each cell's in-plane
        magnetic pair, which leaves the pair's cell averages alone.
        """
        nq = self.k + 3
        xg, wg = legendre.leggauss(nq)
        xi = np.repeat(xg, nq)
        eta = np.tile(xg, nq)
        w = np.outer(wg, wg).ravel() / 4.0
        tab = basis.table_2d(self.k, xi, eta)
        xc, yc = self.centers()
        px = xc[None, :, None] + 0.5 * self.mesh.dx * xi[None, None, :]
        py = yc[:, None, None] + 0.5 * self.mesh.dy * eta[None, None, :]
        px = np.broadcast_to(px, (yc.size, xc.size, xi.size)).copy()
        py = np.broadcast_to(py, (yc.size, xc.size, xi.size)).copy()
        if wrap_x:
            px = _wrap_into(px, self.mesh.x0, self.mesh.x1)
        if wrap_y:
            py = _wrap_into(py, self.mesh.y0, self.mesh.y1)
        vals = np.asarray(fn(px.ravel(), py.ravel()), dtype=float)
        npts = px.size
        if vals.shape != (npts, NCOMP):
            raise ValueError("initial-data callable must return (n, 8) states")
        vals = vals.reshape(yc.size, xc.size, xi.size, NCOMP)
        self.interior[:] = np.einsum("mp,p,rcps->rcsm", tab, w, vals, optimize=True)
        if df_fix:
            self.apply_df_projection()

    def apply_df_projection(self) -> None:
        proj = basis.solenoidal_projector(self.k, self.mesh.dx, self.mesh.dy)
        arr = self.interior
        m = arr.shape[-1]
        pair = np.concatenate([arr[..., BX, :], arr[..., BY, :]], axis=-1)
        pair = pair @ proj.T
        arr[..., BX, :] = pair[..., :m]
        arr[..., BY, :] = pair[..., m:]

    def evaluate(self, x, y) -> np.ndarray:
        """Field values at paired points (x, y), shape (n, 8)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if x.shape != y.shape:
            raise ValueError("x and y must pair up")
        dx, dy = self.mesh.dx, self.mesh.dy
        if self.dual:
            lox, hix = self.mesh.x0 - 0.5 * dx, self.mesh.x1 + 0.5 * dx
            loy, hiy = self.mesh.y0 - 0.5 * dy, self.mesh.y1 + 0.5 * dy
            ix = np.floor((x - self.mesh.x0) / dx + 0.5).astype(np.int64)
            iy = np.floor((y - self.mesh.y0) / dy + 0.5).astype(np.int64)
            topx, topy = self.mesh.nx, self.mesh.ny
        else:
            lox, hix, loy, hiy = self.mesh.x0, self.mesh.x1, self.mesh.y0, self.mesh.y1
            ix = np.floor((x - self.mesh.x0) / dx).astype(np.int64)
            iy = np.floor((y - self.mesh.y0) / dy).astype(np.int64)
            topx, topy = self.mesh.nx - 1, self.mesh.ny - 1
        tol = 1e-10 * min(dx, dy)
        bad = (x < lox - tol) | (x > hix + tol) | (y < loy - tol) | (y > hiy + tol)
        if np.any(bad):
            raise ValueError("evaluation point outside the grid cover")
        ix = np.clip(ix, 0, topx)
        iy = np.clip(iy, 0, topy)
        xc, yc = self.centers()
        xi = np.clip((x - xc[ix]) * (2.0 / dx), -1.0, 1.0)
        eta = np.clip((y - yc[iy]) * (2.0 / dy), -1.0, 1.0)
        tab = basis.table_2d(self.k, xi, eta)
        return np.einsum("ncm,mn->nc", self.interior[iy, ix], tab, optimize=True)


def fill_ghosts_1d(field: Field1D, left: Boundary, right: Boundary) -> None:
    if field.dual:
        raise ValueError("dual fields carry no ghosts")
    check_periodic_pairing({"left": left, "right": right})
    c = field.coeffs
    for side, bc in (("left", left), ("right", right)):
        ghost, near, far = (0, 1, -2) if side == "left" else (-1, -2, 1)
        if bc.kind == "periodic":
            c[ghost] = c[far]
        elif bc.kind == "outflow":
            c[ghost] = c[near]
        elif bc.kind == "reflect":
            c[ghost] = c[near] * _reflect_signs(field.k, None, axis=0)
        elif bc.kind == "inflow":
            c[ghost] = 0.0
            c[ghost, :, 0] = bc.state
        else:
            bc.fill(field, side)


def fill_ghosts_2d(field: Field2D, bcs: dict[str, Boundary]) -> None:
    """Fill the primal ghost ring; x sides first, then y over full rows.

    The second pass covers the ghost columns written by the first, which
    is what makes the corner ghosts come out right for every kind mix.
    """
    if field.dual:
        raise ValueError("dual fields carry no ghosts")
    check_periodic_pairing(bcs)
    c = field.coeffs
    for side in ("left", "right"):
        bc = bcs[side]
        ghost, near, far = (0, 1, -2) if side == "left" else (-1, -2, 1)
        if bc.kind == "periodic":
            c[:, ghost] = c[:, far]
        elif bc.kind == "outflow":
            c[:, ghost] = c[:, near]
        elif bc.kind == "reflect":
            c[:, ghost] = c[:, near] * _reflect_signs(field.k, basis.modes_2d(field.k), 0)
        elif bc.kind == "inflow":
            c[:, ghost] = 0.0
            c[:, ghost, :, 0] = bc.state
        else:
            bc.fill(field, side)
    for side in ("bottom", "top"):
        bc = bcs[side]
        ghost, near, far = (0, 1, -2) if side == "bottom" else (-1, -2, 1)
        if bc.kind == "periodic":
            c[ghost] = c[far]
        elif bc.kind == "outflow":
            c[ghost] = c[near]
        elif bc.kind == "reflect":
            c[ghost] = c[near] * _reflect_signs(field.k, basis.modes_2d(field.k), 1)
        elif bc.kind == "inflow":
            c[ghost] = 0.0
            c[ghost, :, :, 0] = bc.state
        else:
            bc.fill(field, side)

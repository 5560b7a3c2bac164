"""Modal bases on the reference cell [-1, 1]^d.

The scalar basis is the orthonormalized Legendre family,
phi_a(xi) = sqrt(2a+1) P_a(xi), normalized against the cell-mean inner
product (1/|I|) int phi_a phi_b = delta_ab, so the coefficient of the
constant mode is the cell average.  2D modes are tensor products with total
degree <= k, ordered by degree then by x-exponent descending:

    k=2:  (0,0) (1,0) (0,1) (2,0) (1,1) (0,2)

For the locally solenoidal field representation the (B1, B2) coefficient
pair is constrained to the null space of the in-cell divergence map; the
constraint depends on the cell aspect ratio through the 2/dx and 2/dy chain
factors.  `solenoidal_projector` returns the L2-orthogonal projector onto
that null space (constants are solenoidal, so cell averages pass through
unchanged), and `solenoidal_basis` an orthonormal basis of it.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import legendre


def n_modes_1d(k: int) -> int:
    return k + 1


def n_modes_2d(k: int) -> int:
    return (k + 1) * (k + 2) // 2


def modes_2d(k: int):
    """Exponent pairs (a, b) with a + b <= k, graded order."""
    return [(d - b, b) for d in range(k + 1) for b in range(d + 1)]


def _legendre_values(k: int, xi, deriv: int = 0):
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    out = np.empty((k + 1, xi.size))
    for a in range(k + 1):
        coeff = np.zeros(a + 1)
        coeff[a] = np.sqrt(2.0 * a + 1.0)
        if deriv:
            coeff = legendre.legder(coeff, deriv)
        out[a] = legendre.legval(xi, coeff)
    return out


def table_1d(k: int, xi, deriv: int = 0):
    """Basis (or derivative) values, shape (k+1, len(xi))."""
    return _legendre_values(k, xi, deriv)


def table_2d(k: int, xi, eta, dx_order: int = 0, dy_order: int = 0):
    """Tensor basis values at paired points (xi[i], eta[i]).

    Returns shape (n_modes_2d(k), len(xi)).  Derivatives are with respect to
    the reference coordinates; physical gradients need the 2/dx, 2/dy chain
    factors applied by the caller.
    """
    fx = _legendre_values(k, xi, dx_order)
    fy = _legendre_values(k, eta, dy_order)
    return np.stack([fx[a] * fy[b] for a, b in modes_2d(k)])


def divergence_matrix(k: int, dx: float, dy: float):
    """Matrix of (b1, b2) pair coefficients -> in-cell divergence coefficients.

    Rows span the degree-(k-1) modes; columns are the stacked pair
    (b1 modes, b2 modes).  Entries are exact (Gauss rule of sufficient order).
    """
    m = n_modes_2d(k)
    mp = n_modes_2d(k - 1) if k >= 1 else 0
    if k == 0:
        return np.zeros((0, 2 * m))
    x, w = np.polynomial.legendre.leggauss(k + 1)
    XI, ETA = np.meshgrid(x, x, indexing="ij")
    WW = np.outer(w, w).ravel() / 4.0
    xi, eta = XI.ravel(), ETA.ravel()
    test = table_2d(k - 1, xi, eta)
    ddx = (2.0 / dx) * table_2d(k, xi, eta, dx_order=1)
    ddy = (2.0 / dy) * table_2d(k, xi, eta, dy_order=1)
    D = np.empty((mp, 2 * m))
    D[:, :m] = test @ (WW[:, None] * ddx.T)
    D[:, m:] = test @ (WW[:, None] * ddy.T)
    return D


def solenoidal_basis(k: int, dx: float, dy: float):
    """Orthonormal basis of the divergence-free pair space, shape (2m, dim).

    dim = 2 * n_modes_2d(k) - n_modes_2d(k-1).  Degree zero is rejected:
    constants are trivially solenoidal and need no constrained basis.
    """
    if k == 0:
        raise ValueError("degree-0 pairs are constant and need no constraint")
    D = divergence_matrix(k, dx, dy)
    _, s, vt = np.linalg.svd(D)
    rank = int(np.sum(s > s[0] * 1e-12))
    return vt[rank:].T


def solenoidal_projector(k: int, dx: float, dy: float):
    """L2-orthogonal projector of stacked (b1, b2) coefficients onto the
    divergence-free subspace."""
    if k == 0:
        return np.eye(2)
    Q = solenoidal_basis(k, dx, dy)
    return Q @ Q.T

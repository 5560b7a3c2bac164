"""Half-interval quadrature rules.

Every integral in the scheme is assembled from rules on half-cells, because
the opposite-mesh field is polynomial on each half (1D) or quarter (2D) of a
cell but discontinuous across its center lines.  Nodes are stored in the
half-local coordinate s in [0, 1] with weights normalized to sum to one, so
an integral over a half of physical length h/2 is (h/2) * sum(w * f(s)).

The Gauss rule (n = k+1 points) integrates the nonlinear flux terms; the
Lobatto rule (l = ceil((k+3)/2) points, endpoints included) carries the
positivity argument, whose time-step bound involves the first Lobatto weight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Lobatto nodes/weights on [0, 1] (weights sum to 1), by point count.
_LOBATTO = {
    2: ([0.0, 1.0], [0.5, 0.5]),
    3: ([0.0, 0.5, 1.0], [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]),
    4: (
        [0.0, 0.5 * (1.0 - 1.0 / np.sqrt(5.0)), 0.5 * (1.0 + 1.0 / np.sqrt(5.0)), 1.0],
        [1.0 / 12.0, 5.0 / 12.0, 5.0 / 12.0, 1.0 / 12.0],
    ),
}


@dataclass(frozen=True)
class QuadratureSet:
    """Gauss and Lobatto half-interval rules for polynomial degree k."""

    k: int
    gauss_x: np.ndarray
    gauss_w: np.ndarray
    lobatto_x: np.ndarray
    lobatto_w: np.ndarray

    @property
    def n_gauss(self) -> int:
        return len(self.gauss_x)

    @property
    def n_lobatto(self) -> int:
        return len(self.lobatto_x)

    @property
    def first_lobatto_weight(self) -> float:
        return float(self.lobatto_w[0])


def build_quadrature(k: int) -> QuadratureSet:
    """Build the half-interval rules for degree k in {0, 1, 2, 3}.

    The Lobatto count satisfies 2l - 3 >= k, so the rule integrates the
    solution polynomial itself exactly and its first and last nodes sit on
    the half-interval endpoints.
    """
    if k not in (0, 1, 2, 3):
        raise ValueError(f"polynomial degree must be 0..3, got {k}")
    n = k + 1
    x, w = np.polynomial.legendre.leggauss(n)
    order = np.argsort(x)
    gauss_x = 0.5 * (x[order] + 1.0)
    gauss_w = 0.5 * w[order]
    l = int(np.ceil((k + 3) / 2))
    lob_x, lob_w = _LOBATTO[l]
    return QuadratureSet(
        k=k,
        gauss_x=gauss_x,
        gauss_w=gauss_w,
        lobatto_x=np.asarray(lob_x, dtype=float),
        lobatto_w=np.asarray(lob_w, dtype=float),
    )

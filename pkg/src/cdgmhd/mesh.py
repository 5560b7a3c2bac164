"""Uniform overlapping meshes and ghost-cell boundary fills.

Two staggered grids cover the domain.  The primal grid is the usual cell
partition; the dual grid is shifted by half a cell in every direction, so
each dual cell is centered on a primal vertex and sticks half a cell past
the domain edge at the boundary.  Dual-cell updates only ever read primal
data (and vice versa), so a single ghost ring around the primal grid is
all the halo the scheme needs: dual cells carry no ghosts at all.

Boundary conditions act on that primal ghost ring by rewriting modal
coefficient blocks.  Reflection flips the parity of the mirrored modes and
negates the wall-normal momentum and magnetic-field components.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .physics import BX, BY, MX, MY


@dataclass(frozen=True)
class Mesh1D:
    """Interval [x0, x1] split into nx equal primal cells."""

    x0: float
    x1: float
    nx: int

    def __post_init__(self) -> None:
        if self.nx < 1 or not self.x1 > self.x0:
            raise ValueError("mesh needs x1 > x0 and nx >= 1")

    @property
    def dx(self) -> float:
        return (self.x1 - self.x0) / self.nx

    def primal_centers(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.dx

    def dual_centers(self) -> np.ndarray:
        # nx + 1 dual cells; the first and last straddle the domain edge.
        return self.x0 + np.arange(self.nx + 1) * self.dx


@dataclass(frozen=True)
class Mesh2D:
    """Rectangle [x0, x1] x [y0, y1] split into nx by ny primal cells."""

    x0: float
    x1: float
    y0: float
    y1: float
    nx: int
    ny: int

    def __post_init__(self) -> None:
        if self.nx < 1 or self.ny < 1:
            raise ValueError("mesh needs nx, ny >= 1")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("mesh needs x1 > x0 and y1 > y0")

    @property
    def dx(self) -> float:
        return (self.x1 - self.x0) / self.nx

    @property
    def dy(self) -> float:
        return (self.y1 - self.y0) / self.ny

    def primal_centers(self) -> tuple[np.ndarray, np.ndarray]:
        xs = self.x0 + (np.arange(self.nx) + 0.5) * self.dx
        ys = self.y0 + (np.arange(self.ny) + 0.5) * self.dy
        return xs, ys

    def dual_centers(self) -> tuple[np.ndarray, np.ndarray]:
        xs = self.x0 + np.arange(self.nx + 1) * self.dx
        ys = self.y0 + np.arange(self.ny + 1) * self.dy
        return xs, ys


@dataclass(frozen=True)
class Boundary:
    """One side's boundary condition.

    kind is "periodic", "outflow", "reflect", "inflow", or "custom".
    Inflow carries the fixed conserved state; custom carries a callable
    fill(field, side) that writes the ghost slab itself (the jet inlet
    mixes inflow and outflow along one side this way).
    """

    kind: str
    state: np.ndarray | None = None
    fill: Callable | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("periodic", "outflow", "reflect", "inflow", "custom"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "inflow" and (self.state is None or len(self.state) != 8):
            raise ValueError("inflow boundary needs an 8-component state")
        if self.kind == "custom" and self.fill is None:
            raise ValueError("custom boundary needs a fill callable")


PERIODIC = Boundary("periodic")
OUTFLOW = Boundary("outflow")
REFLECT = Boundary("reflect")


def check_periodic_pairing(bcs: dict[str, Boundary]) -> None:
    for lo, hi in (("left", "right"), ("bottom", "top")):
        if lo in bcs and ((bcs[lo].kind == "periodic") != (bcs[hi].kind == "periodic")):
            raise ValueError(f"periodic boundaries must pair up ({lo}/{hi})")


def _reflect_signs(k: int, modes: list[tuple[int, int]] | None, axis: int) -> np.ndarray:
    """Sign table (8, M) applied when mirroring a cell across a wall."""
    if modes is None:  # 1D: modes are plain x-degrees 0..k
        parity = np.array([(-1.0) ** a for a in range(k + 1)])
    else:
        parity = np.array([(-1.0) ** (m[axis]) for m in modes])
    signs = np.tile(parity, (8, 1))
    normal_m = MX if axis == 0 else MY
    normal_b = BX if axis == 0 else BY
    signs[normal_m] *= -1.0
    signs[normal_b] *= -1.0
    return signs

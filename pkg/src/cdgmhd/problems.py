"""Benchmark problem catalog.

Each entry packages a domain, an equation of state, boundary conditions,
an initial-state callable, and a stopping time, so drivers and tests can
set up any case from its name alone.  Initial callables take flat center
coordinates (x for 1D, x and y for 2D) and return (n, 8) conserved states.
Where the exact solution is known (the advected vortex) the setup also
carries a reference callable (x, y, t) -> (n, 8).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .mesh import Boundary, OUTFLOW, PERIODIC, REFLECT
from .physics import IdealGas, conserved

VORTEX_MU = 5.389489439


@dataclass(frozen=True)
class ProblemSetup:
    name: str
    dim: int
    eos: IdealGas
    domain: tuple
    t_end: float
    bcs: object
    init: Callable
    default_cells: tuple
    reference: Callable | None = None
    notes: str = ""


def _riemann_vacuum() -> ProblemSetup:
    eos = IdealGas(5.0 / 3.0)

    def init(x):
        n = x.size
        rho = np.where(x < 0.0, 1e-12, 1.0)
        p = np.where(x < 0.0, 1e-12, 0.5)
        v = np.zeros((n, 3))
        B = np.zeros((n, 3))
        B[:, 1] = np.where(x < 0.0, 0.0, 1.0)
        return conserved(rho, v, B, p, eos)

    return ProblemSetup(
        name="riemann_vacuum",
        dim=1,
        eos=eos,
        domain=(-0.5, 0.5),
        t_end=0.1,
        bcs=(OUTFLOW, OUTFLOW),
        init=init,
        default_cells=(100,),
        notes="near-vacuum left state; exercises the positivity floor",
    )


def _vortex() -> ProblemSetup:
    eos = IdealGas(5.0 / 3.0)
    mu = VORTEX_MU

    def state(x, y):
        n = x.size
        r2 = x * x + y * y
        ex = np.exp(0.5 * (1.0 - r2))
        sv = mu / (np.sqrt(2.0) * np.pi) * ex
        sb = mu / (2.0 * np.pi) * ex
        v = np.stack([1.0 - sv * y, 1.0 + sv * x, np.zeros(n)], axis=-1)
        B = np.stack([-sb * y, sb * x, np.zeros(n)], axis=-1)
        p = 1.0 - mu * mu * (1.0 + r2) / (8.0 * np.pi**2) * np.exp(1.0 - r2)
        return conserved(np.ones(n), v, B, p, eos)

    def reference(x, y, t):
        # the whole pattern rides on the (1, 1) background wind
        span = 20.0
        xs = (x - t - (-10.0)) % span + (-10.0)
        ys = (y - t - (-10.0)) % span + (-10.0)
        return state(xs, ys)

    return ProblemSetup(
        name="vortex",
        dim=2,
        eos=eos,
        domain=(-10.0, 10.0, -10.0, 10.0),
        t_end=0.05,
        bcs={"left": PERIODIC, "right": PERIODIC, "bottom": PERIODIC, "top": PERIODIC},
        init=lambda x, y: state(x, y),
        default_cells=(80, 80),
        reference=reference,
        notes="smooth, exact solution known; center pressure sits near 5e-12",
    )


def _orszag_tang() -> ProblemSetup:
    eos = IdealGas(5.0 / 3.0)
    g = eos.gamma

    def init(x, y):
        n = x.size
        v = np.stack([-np.sin(y), np.sin(x), np.zeros(n)], axis=-1)
        B = np.stack([-np.sin(y), np.sin(2.0 * x), np.zeros(n)], axis=-1)
        return conserved(np.full(n, g * g), v, B, np.full(n, g), eos)

    return ProblemSetup(
        name="orszag_tang",
        dim=2,
        eos=eos,
        domain=(0.0, 2.0 * np.pi, 0.0, 2.0 * np.pi),
        t_end=0.5,
        bcs={"left": PERIODIC, "right": PERIODIC, "bottom": PERIODIC, "top": PERIODIC},
        init=init,
        default_cells=(200, 200),
    )


def _rotor() -> ProblemSetup:
    eos = IdealGas(5.0 / 3.0)
    r0, r1 = 0.1, 0.115

    def init(x, y):
        n = x.size
        dxc, dyc = x - 0.5, y - 0.5
        r = np.sqrt(dxc * dxc + dyc * dyc)
        lam = (r1 - r) / (r1 - r0)
        rho = np.where(r < r0, 10.0, np.where(r < r1, 1.0 + 9.0 * lam, 1.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            ring = np.where(r > 0.0, lam / np.maximum(r, 1e-300), 0.0)
        fac = np.where(r < r0, 1.0 / r0, np.where(r < r1, ring, 0.0))
        v = np.stack([-dyc * fac, dxc * fac, np.zeros(n)], axis=-1)
        B = np.zeros((n, 3))
        B[:, 0] = 2.5 / np.sqrt(4.0 * np.pi)
        return conserved(rho, v, B, np.full(n, 0.5), eos)

    return ProblemSetup(
        name="rotor",
        dim=2,
        eos=eos,
        domain=(0.0, 1.0, 0.0, 1.0),
        t_end=0.295,
        bcs={"left": OUTFLOW, "right": OUTFLOW, "bottom": OUTFLOW, "top": OUTFLOW},
        init=init,
        default_cells=(200, 200),
    )


def _shock_cloud() -> ProblemSetup:
    eos = IdealGas(5.0 / 3.0)
    right = conserved(
        np.array([1.0]),
        np.array([[-11.2536, 0.0, 0.0]]),
        np.array([[0.0, 0.56418958, 0.56418958]]),
        np.array([1.0]),
        eos,
    )[0]

    def init(x, y):
        n = x.size
        left = x < 0.6
        rho = np.where(left, 3.86859, 1.0)
        p = np.where(left, 167.345, 1.0)
        v = np.zeros((n, 3))
        v[:, 0] = np.where(left, 0.0, -11.2536)
        B = np.zeros((n, 3))
        B[:, 1] = np.where(left, 2.1826182, 0.56418958)
        B[:, 2] = np.where(left, -2.1826182, 0.56418958)
        incloud = (x - 0.8) ** 2 + (y - 0.5) ** 2 < 0.15**2
        rho = np.where(incloud, 10.0, rho)
        return conserved(rho, v, B, p, eos)

    return ProblemSetup(
        name="shock_cloud",
        dim=2,
        eos=eos,
        domain=(0.0, 1.0, 0.0, 1.0),
        t_end=0.06,
        bcs={
            "left": OUTFLOW,
            "right": Boundary("inflow", state=right),
            "bottom": OUTFLOW,
            "top": OUTFLOW,
        },
        init=init,
        default_cells=(400, 400),
    )


def _blast(extreme: bool) -> ProblemSetup:
    eos = IdealGas(1.4)
    pe = 1e4 if extreme else 1e3
    b0 = (1000.0 if extreme else 100.0) / np.sqrt(4.0 * np.pi)
    t_end = 0.001 if extreme else 0.01

    def init(x, y):
        n = x.size
        p = np.where(x * x + y * y < 0.1**2, pe, 0.1)
        B = np.zeros((n, 3))
        B[:, 0] = b0
        return conserved(np.ones(n), np.zeros((n, 3)), B, p, eos)

    return ProblemSetup(
        name="blast_extreme" if extreme else "blast_classic",
        dim=2,
        eos=eos,
        domain=(-0.5, 0.5, -0.5, 0.5),
        t_end=t_end,
        bcs={"left": OUTFLOW, "right": OUTFLOW, "bottom": OUTFLOW, "top": OUTFLOW},
        init=init,
        default_cells=(200, 200),
    )


def _jet(case: int) -> ProblemSetup:
    eos = IdealGas(1.4)
    b0 = np.sqrt(200.0 * 10.0 ** (case - 1))
    inlet = conserved(
        np.array([1.4]),
        np.array([[0.0, 800.0, 0.0]]),
        np.array([[0.0, b0, 0.0]]),
        np.array([1.0]),
        eos,
    )[0]

    def init(x, y):
        n = x.size
        B = np.zeros((n, 3))
        B[:, 1] = b0
        return conserved(np.full(n, 0.14), np.zeros((n, 3)), B, np.ones(n), eos)

    def bottom_fill(field, side):
        # inlet over x <= 0.05, ambient outflow elsewhere along the bottom
        c = field.coeffs
        mesh = field.mesh
        xs = mesh.x0 + (np.arange(mesh.nx + 2) - 0.5) * mesh.dx
        jet_cols = xs < 0.05
        c[0] = c[1]
        c[0, jet_cols] = 0.0
        c[0, jet_cols, :, 0] = inlet

    return ProblemSetup(
        name=f"jet_case{case}",
        dim=2,
        eos=eos,
        domain=(0.0, 0.5, 0.0, 1.5),
        t_end=0.002,
        bcs={
            "left": REFLECT,
            "right": OUTFLOW,
            "bottom": Boundary("custom", fill=bottom_fill),
            "top": OUTFLOW,
        },
        init=init,
        default_cells=(200, 600),
        notes=f"Mach-800 jet, half domain mirrored at x=0, B0^2={200.0 * 10.0 ** (case - 1):g}",
    )


_BUILDERS = {
    "riemann_vacuum": _riemann_vacuum,
    "vortex": _vortex,
    "orszag_tang": _orszag_tang,
    "rotor": _rotor,
    "shock_cloud": _shock_cloud,
    "blast_classic": lambda: _blast(False),
    "blast_extreme": lambda: _blast(True),
    "jet_case1": lambda: _jet(1),
    "jet_case2": lambda: _jet(2),
    "jet_case3": lambda: _jet(3),
}

PROBLEM_NAMES = tuple(_BUILDERS)


def build_problem(name: str) -> ProblemSetup:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise KeyError(
            f"unknown problem {name!r}; pick one of {', '.join(PROBLEM_NAMES)}"
        ) from None
    return builder()

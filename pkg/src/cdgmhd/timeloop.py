"""Strong-stability-preserving RK3 stepping with a step-size ladder.

The integrator never trusts a single step size.  Each attempt runs the
three Euler-type stages, limiting both fields after every stage; if a
stage produces a cell whose average is inadmissible, the whole step is
rewound and retried on the next rung of a shrinking ladder.  The first
rung is an aggressive practical step; the second is the proven bound from
the scheme's admissibility analysis (with a safety factor), and the rest
are halvings of it.  A step that fails every rung reports the violation
instead of raising, so drivers can persist diagnostics before quitting.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

RK3_COMBOS = ((0.0, 1.0), (0.75, 0.25), (1.0 / 3.0, 2.0 / 3.0))


@dataclass(frozen=True)
class Violation:
    """First inadmissible cell average seen while limiting a stage."""

    mesh: str
    stage: int
    cell: int


@dataclass
class StepRecord:
    t_new: float
    dt: float
    attempts: int
    limited_cells: int
    min_scale: float
    violation: Violation | None = None

    @property
    def ok(self) -> bool:
        return self.violation is None


def ssp_rk3_step(
    state: Sequence[np.ndarray],
    dt: float,
    rhs: Callable,
    limit: Callable,
) -> tuple[Violation | None, list[np.ndarray], int, float]:
    """One SSP-RK3 step over a tuple of coefficient arrays.

    rhs(arrays) must return matching residual arrays; limit(arrays, stage)
    must enforce admissibility in place and return (violation | None,
    limited_count, min_scale).  The input state is never modified.
    """
    u0 = [a.copy() for a in state]
    u = [a.copy() for a in state]
    limited = 0
    min_scale = 1.0
    for stage, (a, b) in enumerate(RK3_COMBOS):
        resid = rhs(u)
        for arr, r in zip(u, resid):
            arr += dt * r
        if a != 0.0:
            for arr, base in zip(u, u0):
                arr *= b
                arr += a * base
        viol, nlim, scale = limit(u, stage)
        if viol is not None:
            return viol, u, limited, min_scale
        limited = max(limited, nlim)
        min_scale = min(min_scale, scale)
    return None, u, limited, min_scale


def dt_ladder(dt_practical: float, dt_theory: float, use_practical: bool) -> list[float]:
    """Strictly decreasing step-size candidates for one step."""
    rungs = [0.9 * dt_theory, 0.45 * dt_theory, 0.225 * dt_theory, 0.1125 * dt_theory]
    if use_practical:
        rungs.insert(0, dt_practical)
    out: list[float] = []
    for r in rungs:
        if not out or r < out[-1] * (1.0 - 1e-12):
            out.append(r)
    return out


def advance_step(
    state: Sequence[np.ndarray],
    t: float,
    t_end: float,
    dts: tuple[float, float],
    rhs_for: Callable,
    limit: Callable,
    use_practical: bool = True,
) -> tuple[list[np.ndarray], StepRecord]:
    """Advance one accepted step, walking the ladder on violations.

    dts is (dt_practical, dt_theory) for the current state; rhs_for(tau)
    returns the stage-residual callable for that relaxation time.
    """
    dt_practical, dt_theory = dts
    last_viol = None
    attempts = 0
    tried: set[float] = set()
    for dt in dt_ladder(dt_practical, dt_theory, use_practical):
        dt = min(dt, t_end - t)
        if dt <= 0.0 or dt in tried:
            continue
        tried.add(dt)
        attempts += 1
        viol, new, limited, min_scale = ssp_rk3_step(state, dt, rhs_for(dt), limit)
        if viol is None:
            return list(new), StepRecord(t + dt, dt, attempts, limited, min_scale)
        last_viol = viol
    return list(state), StepRecord(t, 0.0, attempts, 0, 1.0, violation=last_viol)

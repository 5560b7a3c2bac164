"""Randomized verification batteries for the positivity building blocks.

Each battery draws a seeded batch of random states and checks one inequality
that the scheme's positivity argument rests on.  Failures are report content,
not exceptions: a battery returns the number of violations and the first
offending sample so a red run can be reproduced from (seed, index).

State sampling is done in primitive variables: log-uniform density and
pressure over [1e-8, 1e3] and uniform velocity/field components in [-10, 10],
which covers near-vacuum, high-Mach and strongly magnetized corners.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from cdgmhd import physics
from cdgmhd.mesh import Mesh2D, OUTFLOW
from cdgmhd.physics import IdealGas
from cdgmhd.solver2d import (
    LOCALLY_DF_PP,
    STANDARD,
    Scheme2D,
    discrete_div_primal,
    tilde_div_primal,
    wave_speeds_2d,
)

LOG_RANGE = (-8.0, 3.0)
BOX = 10.0


def sample_admissible(rng: np.random.Generator, n: int, eos: IdealGas):
    """Random admissible conserved states, shape (n, 8)."""
    rho = 10.0 ** rng.uniform(*LOG_RANGE, size=n)
    p = 10.0 ** rng.uniform(*LOG_RANGE, size=n)
    v = rng.uniform(-BOX, BOX, size=(n, 3))
    B = rng.uniform(-BOX, BOX, size=(n, 3))
    return physics.conserved(rho, v, B, p, eos)


def sample_signed(rng: np.random.Generator, n: int):
    """Random states with rho > 0 but internal energy of either sign."""
    rho = 10.0 ** rng.uniform(*LOG_RANGE, size=n)
    m = rng.uniform(-BOX, BOX, size=(n, 3))
    B = rng.uniform(-BOX, BOX, size=(n, 3))
    rho_e = rng.uniform(-5.0, 5.0, size=n)
    U = np.empty((n, 8))
    U[:, physics.RHO] = rho
    U[:, physics.MX:physics.MZ + 1] = m
    U[:, physics.BX:physics.BZ + 1] = B
    U[:, physics.EN] = (
        0.5 * np.sum(m * m, axis=-1) / rho + 0.5 * np.sum(B * B, axis=-1) + rho_e
    )
    return U


def sample_aux(rng: np.random.Generator, n: int):
    return rng.uniform(-BOX, BOX, size=(n, 3)), rng.uniform(-BOX, BOX, size=(n, 3))


@dataclass
class BatteryResult:
    name: str
    seed: int
    samples: int
    violations: int
    first_violation: dict | None = None

    @property
    def passed(self) -> bool:
        return self.violations == 0


@dataclass
class VerificationReport:
    seed: int
    samples: int
    batteries: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(b.passed for b in self.batteries)

    def to_json(self) -> str:
        doc = {
            "seed": self.seed,
            "samples": self.samples,
            "passed": self.passed,
            "batteries": [asdict(b) for b in self.batteries],
        }
        return json.dumps(doc, indent=2)


def _first_bad(name, seed, n, bad_mask, **arrays) -> BatteryResult:
    bad = np.flatnonzero(bad_mask)
    first = None
    if bad.size:
        i = int(bad[0])
        first = {"index": i}
        for key, arr in arrays.items():
            first[key] = np.asarray(arr)[i].tolist()
    return BatteryResult(name, seed, n, int(bad.size), first)


def battery_equivalence(seed: int, n: int, eos: IdealGas) -> BatteryResult:
    """admissible(U) must agree with positivity of the linear form at the
    state's own (v, B), for states on both sides of the boundary."""
    rng = np.random.default_rng(seed)
    U = np.concatenate([sample_signed(rng, n // 2),
                        sample_admissible(rng, n - n // 2, eos)])
    rho = U[:, physics.RHO]
    v = U[:, physics.MX:physics.MZ + 1] / rho[:, None]
    B = U[:, physics.BX:physics.BZ + 1]
    lf = physics.linear_form(U, v, B)
    bad = physics.admissible(U) != (lf > 0.0)
    return _first_bad("equivalence", seed, len(U), bad, state=U, linear_form=lf)


def battery_flux_split(seed: int, n: int, eos: IdealGas) -> BatteryResult:
    """Strict positivity of the two-state flux-split form when the split
    coefficient exceeds the pairwise wave-speed bound (inflated by 1e-6)."""
    rng = np.random.default_rng(seed)
    U = sample_admissible(rng, n, eos)
    Ut = sample_admissible(rng, n, eos)
    v_aux, B_aux = sample_aux(rng, n)
    axis = rng.integers(0, 3, size=n)
    lhs = np.empty(n)
    for ax in range(3):
        sel = axis == ax
        if not np.any(sel):
            continue
        a, b = U[sel], Ut[sel]
        alpha = 1.000001 * physics.pairwise_wave_speed(a, b, eos, ax)
        left = a - physics.flux(a, eos, ax) / alpha[:, None]
        right = b + physics.flux(b, eos, ax) / alpha[:, None]
        cross = (
            (a[:, physics.BX + ax] - b[:, physics.BX + ax]) / alpha
            * np.sum(v_aux[sel] * B_aux[sel], axis=-1)
        )
        lhs[sel] = (
            physics.linear_form(left, v_aux[sel], B_aux[sel])
            + physics.linear_form(right, v_aux[sel], B_aux[sel])
            + cross
        )
    bad = ~(lhs > 0.0)
    return _first_bad("flux_split", seed, n, bad, state=U, state_other=Ut, lhs=lhs)


def battery_jump_bound(seed: int, n: int, eos: IdealGas) -> BatteryResult:
    """Interface jump penalty |dB_axis| / (2 sqrt(mean rho)) never exceeds half
    the pairwise wave-speed bound along the same axis."""
    rng = np.random.default_rng(seed)
    U = sample_admissible(rng, n, eos)
    Ut = sample_admissible(rng, n, eos)
    axis = rng.integers(0, 3, size=n)
    beta = np.empty(n)
    alpha = np.empty(n)
    for ax in range(3):
        sel = axis == ax
        if not np.any(sel):
            continue
        a, b = U[sel], Ut[sel]
        mean_rho = 0.5 * (a[:, physics.RHO] + b[:, physics.RHO])
        dB = np.abs(a[:, physics.BX + ax] - b[:, physics.BX + ax])
        beta[sel] = dB / (2.0 * np.sqrt(mean_rho))
        alpha[sel] = physics.pairwise_wave_speed(a, b, eos, ax)
    bad = beta > 0.5 * alpha * (1.0 + 1e-12)
    return _first_bad("jump_bound", seed, n, bad, state=U, state_other=Ut,
                      beta=beta, alpha=alpha)


def battery_source_bound(seed: int, n: int, eos: IdealGas) -> BatteryResult:
    """Source direction bound: for any xi,
    -xi S(U).n* >= xi (v*.B*) - |xi|/sqrt(rho) * linear_form(U; v*, B*)."""
    rng = np.random.default_rng(seed)
    U = sample_admissible(rng, n, eos)
    v_aux, B_aux = sample_aux(rng, n)
    xi = rng.uniform(-BOX, BOX, size=n)
    S = physics.godunov_powell_source(U)
    n_star = np.empty((n, 8))
    n_star[:, physics.RHO] = 0.5 * np.sum(v_aux * v_aux, axis=-1)
    n_star[:, physics.MX:physics.MZ + 1] = -v_aux
    n_star[:, physics.BX:physics.BZ + 1] = -B_aux
    n_star[:, physics.EN] = 1.0
    lhs = -xi * np.sum(S * n_star, axis=-1)
    lf = physics.linear_form(U, v_aux, B_aux)
    rhs = xi * np.sum(v_aux * B_aux, axis=-1) - np.abs(xi) / np.sqrt(
        U[:, physics.RHO]
    ) * lf
    slack = 1e-12 * (np.abs(lhs) + np.abs(rhs) + 1.0)
    bad = lhs < rhs - slack
    return _first_bad("source_bound", seed, n, bad, state=U, lhs=lhs, rhs=rhs)


def battery_convexity(seed: int, n: int, eos: IdealGas) -> BatteryResult:
    """Convex combinations of admissible states stay admissible."""
    rng = np.random.default_rng(seed)
    U = sample_admissible(rng, n, eos)
    Ut = sample_admissible(rng, n, eos)
    lam = rng.uniform(0.0, 1.0, size=(n, 1))
    mix = lam * U + (1.0 - lam) * Ut
    bad = ~physics.admissible(mix)
    return _first_bad("convexity", seed, n, bad, state=U, state_other=Ut, mix=mix)


BATTERIES = {
    "equivalence": battery_equivalence,
    "flux_split": battery_flux_split,
    "jump_bound": battery_jump_bound,
    "source_bound": battery_source_bound,
    "convexity": battery_convexity,
}


def fuzz_lemmas(seed: int = 0, n_samples: int = 10_000,
                batteries=None, eos: IdealGas | None = None) -> VerificationReport:
    """Run the requested batteries (default: all) at a fixed seed.

    Identical (seed, n_samples) always yields an identical report.
    """
    eos = eos or IdealGas()
    names = list(BATTERIES) if batteries is None else list(batteries)
    report = VerificationReport(seed=seed, samples=n_samples)
    for offset, name in enumerate(names):
        if name not in BATTERIES:
            raise ValueError(f"unknown battery {name!r}; know {sorted(BATTERIES)}")
        report.batteries.append(BATTERIES[name](seed + offset, n_samples, eos))
    return report


# ---------------------------------------------------------------------------
# constructed positivity breakdown of the source-free central update


@dataclass(frozen=True)
class CounterexampleFamily:
    """Three admissible constant states whose naive central update is not.

    The center cell holds U0; the two dual cells covering its left and
    right halves hold U1 and U2, which differ only in the normal magnetic
    component, so the overlap carries a divergence jump of epsilon / dx.
    For the variant without the interior source, one forward Euler step at
    dt = theta * cfl_number * dx / (a1 + a2) drives the center's internal
    energy negative once pressure is small, for every cfl_number and
    theta; energy_limit() is the closed-form value at pressure -> 0.

    Wave speeds are the bounding pair (5, sqrt(gamma p + 4) + 1), which
    dominates the data speeds everywhere in the valid parameter box (the
    report double-checks that).
    """

    pressure: float
    epsilon: float = 0.5
    gamma: float = 5.0 / 3.0
    cfl_number: float = 8.0
    theta: float = 1.0

    def __post_init__(self) -> None:
        if self.cfl_number <= 0.0:
            raise ValueError("cfl_number must be positive")
        if not 0.0 < self.pressure < 1.0 / self.gamma:
            raise ValueError("pressure must lie in (0, 1/gamma)")
        if not 0.0 < self.epsilon < self.delta:
            raise ValueError("epsilon must lie in (0, min(cfl_number/8, 1))")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("theta must lie in (0, 1]")

    @property
    def delta(self) -> float:
        return min(self.cfl_number / 8.0, 1.0)

    @property
    def eos(self) -> IdealGas:
        return IdealGas(self.gamma)

    def bounding_speeds(self) -> tuple[float, float]:
        return 5.0, np.sqrt(self.gamma * self.pressure + 4.0) + 1.0

    def states(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(U0, U1, U2) conserved states at this family's pressure."""
        d, e, p = self.delta, self.epsilon, self.pressure
        pg = p / (self.gamma - 1.0)
        U0 = np.array([
            1.0, 1.0 + d * e, 0.0, 0.0,
            1.0 + 0.5 * e, 0.0, 0.0,
            0.5 * (1.0 + d * e) ** 2 + (2.0 + e) ** 2 / 8.0 + pg,
        ])
        U1 = np.array([1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0 + pg])
        U2 = np.array([
            1.0, 1.0, 0.0, 0.0, 1.0 + e, 0.0, 0.0,
            0.5 * (1.0 + (1.0 + e) ** 2) + pg,
        ])
        return U0, U1, U2

    def updated_center(self) -> np.ndarray:
        """Closed-form forward-Euler update of the center average."""
        U0, U1, U2 = self.states()
        a1, a2 = self.bounding_speeds()
        coef = self.theta * self.cfl_number / (a1 + a2)
        return (
            (1.0 - self.theta) * U0
            + 0.5 * self.theta * (U1 + U2)
            + coef * (physics.flux(U1, self.eos, 0) - physics.flux(U2, self.eos, 0))
        )

    def energy_limit(self) -> float:
        """Internal energy of the updated center in the pressure -> 0 limit."""
        dh = self.cfl_number / 8.0
        dl = self.delta
        dt = dh - dl
        e, th = self.epsilon, self.theta
        return -(th * e / 8.0) * (
            (8.0 * dh - e)
            + th * e * (2.0 * dt + dh * e) ** 2
            + 4.0 * e * (dh + dl * dt + dl * dh * (1.0 + e))
        )


def _breakdown_scheme(family: CounterexampleFamily, variant, dx: float, cells: int) -> Scheme2D:
    side = cells * dx
    mesh = Mesh2D(0.0, side, 0.0, side, cells, cells)
    bcs = {"left": OUTFLOW, "right": OUTFLOW, "bottom": OUTFLOW, "top": OUTFLOW}
    sch = Scheme2D(mesh, 0, family.eos, bcs, variant=variant)
    U0, U1, U2 = family.states()
    sch.primal.coeffs[..., 0] = U0
    sch.dual.coeffs[..., 0] = U0
    mid = cells // 2
    sch.dual.coeffs[mid - 1 : mid + 1, mid - 1, :, 0] = U1
    sch.dual.coeffs[mid - 1 : mid + 1, mid, :, 0] = U2
    return sch


@dataclass
class CounterexampleReport:
    pressure: float
    epsilon: float
    gamma: float
    cfl_number: float
    theta: float
    dx: float
    dt: float
    chosen_speeds: tuple
    data_speeds: tuple
    speeds_bounded: bool
    step_relation_residual: float
    inputs_admissible: bool
    update_state: list
    update_internal_energy: float
    update_admissible: bool
    closed_form_gap: float
    div_center: float
    tilde_div_center: float
    div_expected: float
    limit_energy: float
    sweep_pressures: list
    sweep_energies: list
    df_dt: float
    df_update_admissible: bool
    df_min_density: float
    df_min_pressure: float

    @property
    def breakdown_demonstrated(self) -> bool:
        return (
            self.inputs_admissible
            and self.speeds_bounded
            and self.step_relation_residual < 1e-12
            and not self.update_admissible
            and self.limit_energy < 0.0
            and self.df_update_admissible
        )

    def to_json(self) -> str:
        doc = {k: v for k, v in self.__dict__.items()}
        doc["breakdown_demonstrated"] = self.breakdown_demonstrated
        return json.dumps(doc, indent=2)


def run_counterexample(
    family: CounterexampleFamily,
    dx: float = 0.1,
    theta: float | None = None,
    cells: int = 6,
    sweep: np.ndarray | None = None,
) -> CounterexampleReport:
    """Demonstrate the positivity breakdown of the source-free update.

    Builds the overlapping piecewise-constant fields, takes one forward
    Euler step of the source-free k=0 scheme at the family's step-size
    relation, and evaluates admissibility of the center average.  The
    pressure sweep and the closed-form zero-pressure limit are evaluated
    alongside; a second arm runs the source-carrying variant on the same
    data at its provable step size and checks every updated average.
    """
    if theta is not None:
        family = CounterexampleFamily(
            family.pressure, family.epsilon, family.gamma, family.cfl_number, theta
        )
    if cells < 4 or cells % 2:
        raise ValueError("cells must be even and at least 4")
    eos = family.eos
    U0, U1, U2 = family.states()
    mid = cells // 2

    sch = _breakdown_scheme(family, STANDARD, dx, cells)
    data = wave_speeds_2d(sch.primal, sch.dual, eos, STANDARD)
    a1, a2 = family.bounding_speeds()
    dt = family.theta * family.cfl_number * dx / (a1 + a2)
    rhs = sch.rhs_for(dt)
    rp, _ = rhs([sch.primal.coeffs.copy(), sch.dual.coeffs.copy()])
    update = U0 + dt * rp[mid, mid, :, 0]
    closed = family.updated_center()

    div_c = discrete_div_primal(sch.dual, mid - 1, mid - 1)
    tilde_c = tilde_div_primal(sch.dual, mid - 1, mid - 1)

    grid = np.logspace(-2.0, -6.0, 9) if sweep is None else np.asarray(sweep, dtype=float)
    energies = []
    for p in grid:
        fam_p = CounterexampleFamily(
            float(p), family.epsilon, family.gamma, family.cfl_number, family.theta
        )
        energies.append(float(physics.internal_energy_density(fam_p.updated_center())))

    pp = _breakdown_scheme(family, LOCALLY_DF_PP, dx, cells)
    s1, s2 = pp.signal_speeds()[:2]
    df_dt = pp.dt_theory(s1, s2)
    rhs_pp = pp.rhs_for(df_dt)
    rpp, rdp = rhs_pp([pp.primal.coeffs.copy(), pp.dual.coeffs.copy()])
    new_p = pp.primal.coeffs[1:-1, 1:-1, :, 0] + df_dt * rpp[1:-1, 1:-1, :, 0]
    new_d = pp.dual.coeffs[..., 0] + df_dt * rdp[..., 0]
    both = np.concatenate([new_p.reshape(-1, 8), new_d.reshape(-1, 8)])
    df_ok = bool(physics.admissible(both).all())
    df_rho = float(both[:, physics.RHO].min())
    df_p = float((eos.gamma - 1.0) * physics.internal_energy_density(both).min())

    return CounterexampleReport(
        pressure=family.pressure,
        epsilon=family.epsilon,
        gamma=family.gamma,
        cfl_number=family.cfl_number,
        theta=family.theta,
        dx=dx,
        dt=dt,
        chosen_speeds=(a1, a2),
        data_speeds=(float(data[2]), float(data[3])),
        speeds_bounded=bool(data[2] <= a1 + 1e-12 and data[3] <= a2 + 1e-12),
        step_relation_residual=float(
            abs(dt * (a1 + a2) / dx - family.theta * family.cfl_number)
        ),
        inputs_admissible=bool(physics.admissible(np.stack([U0, U1, U2])).all()),
        update_state=update.tolist(),
        update_internal_energy=float(physics.internal_energy_density(update)),
        update_admissible=bool(physics.admissible(update)),
        closed_form_gap=float(np.abs(update - closed).max()),
        div_center=float(div_c),
        tilde_div_center=float(tilde_c),
        div_expected=family.epsilon / dx,
        limit_energy=family.energy_limit(),
        sweep_pressures=grid.tolist(),
        sweep_energies=energies,
        df_dt=df_dt,
        df_update_admissible=df_ok,
        df_min_density=df_rho,
        df_min_pressure=df_p,
    )

"""Benchmark driver: set up a case from a RunConfig, run it, write artifacts.

A run produces, inside the output directory:

  snapshot_0000.csv ...   sampled primal states, header
                          t,x,y,rho,m1,m2,m3,B1,B2,B3,E,p
  diagnostics.csv         one row per recorded step, header
                          t,dt,eps_div,min_rho,min_p,limited_cells
  checkpoint_final.npz    full coefficient arrays for bitwise restart
  run.json                manifest with the resolved setup and the outcome
  failure.json            only on abort; kind is one of inadmissible,
                          nonfinite, io, incomplete (max_steps hit first)

Snapshot rows sample primal cell centers; with oversample on, k+1 uniform
points per axis per cell are appended (the exact-center combination is
skipped when present, the center row already covers it).  Values print
with repr-exact precision so files compare byte for byte across restarts.

Exit statuses: 0 success, 2 inadmissible or non-finite state, 3 bad
configuration, 4 I/O failure.  run() returns them instead of raising.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, validate_config
from .mesh import Mesh1D, Mesh2D
from .physics import internal_energy_density
from .problems import ProblemSetup, build_problem
from .solver1d import Scheme1D
from .solver2d import InadmissiblePoint, Scheme2D, SchemeVariant
from .timeloop import StepRecord

EXIT_OK = 0
EXIT_INADMISSIBLE = 2
EXIT_CONFIG = 3
EXIT_IO = 4

SNAPSHOT_HEADER = "t,x,y,rho,m1,m2,m3,B1,B2,B3,E,p"
DIAG_HEADER = "t,dt,eps_div,min_rho,min_p,limited_cells"


@dataclass
class RunResult:
    status: int
    t: float
    steps: int
    outdir: str
    failure: dict | None = None

    @property
    def ok(self) -> bool:
        return self.status == EXIT_OK


def resolve_cells(cfg: RunConfig, setup: ProblemSetup) -> tuple[int, ...]:
    if setup.dim == 1:
        return (cfg.nx or setup.default_cells[0],)
    return (cfg.nx or setup.default_cells[0], cfg.ny or setup.default_cells[1])


def make_variant(cfg: RunConfig) -> SchemeVariant:
    source = cfg.source
    if source is None:
        source = cfg.variant == "locally_df_pp"
    return SchemeVariant(cfg.variant, limiter=cfg.limiter, source=source)


def build_scheme(cfg: RunConfig) -> tuple[ProblemSetup, object]:
    """Construct the configured scheme with initial data projected."""
    setup = build_problem(cfg.problem)
    cells = resolve_cells(cfg, setup)
    variant = make_variant(cfg)
    common = dict(
        theta=cfg.theta,
        cfl=cfg.cfl,
        use_practical_dt=cfg.cfl_mode == "practical",
    )
    if setup.dim == 1:
        mesh = Mesh1D(setup.domain[0], setup.domain[1], cells[0])
        scheme = Scheme1D(
            mesh, cfg.k, setup.eos,
            bc_left=setup.bcs[0], bc_right=setup.bcs[1],
            df=variant.locally_df, limiter=variant.limiter, **common,
        )
    else:
        mesh = Mesh2D(*setup.domain, cells[0], cells[1])
        scheme = Scheme2D(
            mesh, cfg.k, setup.eos, dict(setup.bcs),
            variant=variant, debug_pp=cfg.debug_pp, **common,
        )
    scheme.set_initial(setup.init)
    return setup, scheme


# --------------------------------------------------------------------------
# artifact writers


def _sample_points(scheme, oversample: bool) -> tuple[np.ndarray, np.ndarray]:
    """Flat (x, y) sample coordinates over the primal mesh."""
    mesh = scheme.mesh
    k = scheme.k
    if isinstance(scheme, Scheme1D):
        xc = mesh.primal_centers()
        xs = [xc]
        if oversample:
            off = (2.0 * np.arange(k + 1) + 1.0) / (k + 1) - 1.0
            off = off[np.abs(off) > 1e-15]
            if off.size:
                xs.append((xc[:, None] + 0.5 * mesh.dx * off[None, :]).ravel())
        x = np.concatenate(xs)
        return x, np.zeros_like(x)
    xc, yc = mesh.primal_centers()
    x = [np.tile(xc, yc.size)]
    y = [np.repeat(yc, xc.size)]
    if oversample:
        off = (2.0 * np.arange(k + 1) + 1.0) / (k + 1) - 1.0
        ox = np.repeat(off, off.size)
        oy = np.tile(off, off.size)
        keep = (np.abs(ox) > 1e-15) | (np.abs(oy) > 1e-15)
        ox, oy = ox[keep], oy[keep]
        if ox.size:
            px = xc[None, :, None] + 0.5 * mesh.dx * ox[None, None, :]
            py = yc[:, None, None] + 0.5 * mesh.dy * oy[None, None, :]
            px, py = np.broadcast_arrays(px, py)
            x.append(px.ravel())
            y.append(py.ravel())
    return np.concatenate(x), np.concatenate(y)


def write_snapshot(path: Path, scheme, oversample: bool = False) -> None:
    x, y = _sample_points(scheme, oversample)
    if isinstance(scheme, Scheme1D):
        states = scheme.primal.evaluate(x)
    else:
        states = scheme.primal.evaluate(x, y)
    p = (scheme.eos.gamma - 1.0) * internal_energy_density(states)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SNAPSHOT_HEADER + "\n")
        t = scheme.t
        for i in range(x.size):
            row = [t, x[i], y[i], *states[i], p[i]]
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _diag_row(scheme, rec: StepRecord) -> str:
    eps = scheme.eps_div_now() if isinstance(scheme, Scheme2D) else 0.0
    rho, p = scheme.min_average_density_pressure()
    vals = (scheme.t, rec.dt, eps, rho, p)
    return ",".join(f"{v:.17g}" for v in vals) + f",{rec.limited_cells}"


def save_checkpoint(path: Path, cfg: RunConfig, scheme, steps: int) -> None:
    np.savez(
        path,
        t=np.float64(scheme.t),
        steps=np.int64(steps),
        primal=scheme.primal.coeffs,
        dual=scheme.dual.coeffs,
        problem=np.str_(cfg.problem),
        variant=np.str_(cfg.variant),
        k=np.int64(scheme.k),
        cells=np.asarray(resolve_cells(cfg, build_problem(cfg.problem)), dtype=np.int64),
    )


def load_checkpoint(path: str, cfg: RunConfig, scheme) -> int:
    """Restore state in place; returns the checkpoint's step count."""
    try:
        with np.load(path) as data:
            if str(data["problem"]) != cfg.problem or str(data["variant"]) != cfg.variant:
                raise ConfigError(f"checkpoint {path} was made for a different setup")
            if int(data["k"]) != scheme.k or data["primal"].shape != scheme.primal.coeffs.shape:
                raise ConfigError(f"checkpoint {path} does not match the configured mesh or degree")
            scheme.primal.coeffs[:] = data["primal"]
            scheme.dual.coeffs[:] = data["dual"]
            scheme.t = float(data["t"])
            return int(data["steps"])
    except OSError as err:
        raise ConfigError(f"cannot read checkpoint {path}: {err}") from None


# --------------------------------------------------------------------------
# the run driver


def _failure(kind: str, scheme, steps: int, message: str, **detail) -> dict:
    return {
        "kind": kind,
        "t": float(scheme.t) if scheme is not None else None,
        "step": steps,
        "message": message,
        **detail,
    }


def _classify_point(err: InadmissiblePoint) -> str:
    value = getattr(err, "value", None)
    if value is not None and not np.isfinite(value):
        return "nonfinite"
    return "inadmissible"


def _json_safe(seq) -> list:
    return [v.item() if isinstance(v, np.generic) else v for v in seq]


def _state_finite(scheme) -> bool:
    return bool(
        np.isfinite(scheme.primal.coeffs).all() and np.isfinite(scheme.dual.coeffs).all()
    )


def run(cfg: RunConfig) -> RunResult:
    """Execute one configured case; never raises for expected failures."""
    try:
        validate_config(cfg)
    except ConfigError as err:
        return RunResult(EXIT_CONFIG, 0.0, 0, cfg.out, {"kind": "config", "message": str(err)})

    outdir = Path(cfg.out)
    steps = 0
    scheme = None
    failure = None
    status = EXIT_OK
    try:
        setup, scheme = build_scheme(cfg)
    except ValueError as err:
        # inadmissible initial averages
        return RunResult(
            EXIT_INADMISSIBLE, 0.0, 0, cfg.out,
            _failure("inadmissible", scheme, 0, str(err)),
        )
    t_end = setup.t_end if cfg.t_end is None else cfg.t_end

    try:
        outdir.mkdir(parents=True, exist_ok=True)
        if cfg.resume is not None:
            try:
                steps = load_checkpoint(cfg.resume, cfg, scheme)
            except ConfigError as err:
                return RunResult(
                    EXIT_CONFIG, scheme.t, 0, cfg.out, {"kind": "config", "message": str(err)}
                )

        snap_index = 0
        write_snapshot(outdir / f"snapshot_{snap_index:04d}.csv", scheme, cfg.oversample)
        diag = open(outdir / "diagnostics.csv", "w", encoding="utf-8", newline="\n")
        with diag:
            diag.write(DIAG_HEADER + "\n")
            if t_end > scheme.t:
                while scheme.t < t_end * (1.0 - 1e-14) and steps < cfg.max_steps:
                    try:
                        rec = scheme.step(t_end)
                    except InadmissiblePoint as err:
                        failure = _failure(
                            _classify_point(err), scheme, steps + 1, str(err),
                            mesh=err.mesh, where=_json_safe(err.where), constraint=err.constraint,
                        )
                        status = EXIT_INADMISSIBLE
                        break
                    steps += 1
                    done = scheme.t >= t_end * (1.0 - 1e-14)
                    if not rec.ok:
                        v = rec.violation
                        kind = "inadmissible" if _state_finite(scheme) else "nonfinite"
                        failure = _failure(
                            kind, scheme, steps,
                            "cell average left the admissible set and step-size retries were exhausted",
                            mesh=v.mesh, stage=v.stage, cell=v.cell, attempts=rec.attempts,
                        )
                        status = EXIT_INADMISSIBLE
                        diag.write(_diag_row(scheme, rec) + "\n")
                        break
                    if not _state_finite(scheme):
                        failure = _failure(
                            "nonfinite", scheme, steps, "state lost finiteness after a step"
                        )
                        status = EXIT_INADMISSIBLE
                        break
                    if steps % cfg.diag_every == 0 or done:
                        diag.write(_diag_row(scheme, rec) + "\n")
                    if cfg.snapshot_every and not done and steps % cfg.snapshot_every == 0:
                        snap_index += 1
                        write_snapshot(
                            outdir / f"snapshot_{snap_index:04d}.csv", scheme, cfg.oversample
                        )
                    if cfg.checkpoint_every and steps % cfg.checkpoint_every == 0:
                        save_checkpoint(outdir / f"checkpoint_{steps:06d}.npz", cfg, scheme, steps)
                if status == EXIT_OK and scheme.t < t_end * (1.0 - 1e-14):
                    failure = _failure(
                        "incomplete", scheme, steps,
                        f"max_steps={cfg.max_steps} reached before t_end",
                    )
                    status = EXIT_INADMISSIBLE

        if status == EXIT_OK and t_end > 0.0:
            snap_index += 1
            write_snapshot(outdir / f"snapshot_{snap_index:04d}.csv", scheme, cfg.oversample)
        save_checkpoint(outdir / "checkpoint_final.npz", cfg, scheme, steps)

        manifest = {
            "problem": cfg.problem,
            "variant": cfg.variant,
            "limiter": cfg.limiter,
            "source": make_variant(cfg).source,
            "k": cfg.k,
            "cells": list(resolve_cells(cfg, setup)),
            "theta": cfg.theta,
            "cfl": cfg.cfl,
            "cfl_mode": cfg.cfl_mode,
            "t_end": t_end,
            "seed": cfg.seed,
            "status": status,
            "steps": steps,
            "final_t": scheme.t,
            "snapshots": snap_index + 1,
            "failure": failure,
        }
        with open(outdir / "run.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
        if failure is not None:
            with open(outdir / "failure.json", "w", encoding="utf-8") as fh:
                json.dump(failure, fh, indent=2)
    except OSError as err:
        return RunResult(
            EXIT_IO, scheme.t, steps, cfg.out, _failure("io", scheme, steps, str(err))
        )

    return RunResult(status, scheme.t, steps, cfg.out, failure)


# --------------------------------------------------------------------------
# convergence study


@dataclass
class ConvergenceReport:
    """Mesh-refinement errors and observed orders.

    errors is (levels, 8) with the l1 norm of each conserved component at
    the final time; rates is (levels - 1, 8) with the observed order
    between consecutive levels.  eps holds the global divergence measure
    per level with its own rate column.  reference records which exact
    state the errors were measured against.
    """

    problem: str
    reference: str
    cells: list[tuple[int, ...]]
    errors: np.ndarray
    rates: np.ndarray
    eps: np.ndarray
    eps_rates: np.ndarray

    def table(self) -> str:
        comps = ["rho", "m1", "m2", "m3", "B1", "B2", "B3", "E"]
        lines = ["cells," + ",".join(comps) + ",eps_div"]
        for i, cells in enumerate(self.cells):
            tag = "x".join(str(c) for c in cells)
            vals = ",".join(f"{v:.6e}" for v in self.errors[i])
            lines.append(f"{tag},{vals},{self.eps[i]:.6e}")
            if i + 1 < len(self.cells):
                vals = ",".join(f"{v:.2f}" for v in self.rates[i])
                lines.append(f"rate,{vals},{self.eps_rates[i]:.2f}")
        return "\n".join(lines) + "\n"


def convergence_study(
    cfg: RunConfig,
    levels: list,
    reference: str = "advected",
) -> ConvergenceReport:
    """Run cfg.problem over the given mesh levels and measure l1 errors.

    levels entries are cell counts, either ints (squares in 2D) or tuples.
    reference picks the exact state at t_end: "advected" uses the
    problem's exact-solution callable, "stationary" compares against the
    unmoved initial profile.  The error is the domain-averaged integral
    norm (1/|Omega|) * int |num - exact|, evaluated per component with
    tensor Gauss quadrature on every primal cell.  Cell centers alone
    are no good here: the center values superconverge on coarse meshes
    and the measured rates come out erratic.
    """
    validate_config(cfg)
    setup = build_problem(cfg.problem)
    if setup.dim != 2:
        raise ConfigError("convergence studies are wired for the 2D catalog")
    if reference not in ("advected", "stationary"):
        raise ConfigError("reference must be advected or stationary")
    if reference == "advected" and setup.reference is None:
        raise ConfigError(f"{cfg.problem} has no exact solution to measure against")

    norm: list[tuple[int, int]] = []
    for lev in levels:
        pair = (int(lev), int(lev)) if np.isscalar(lev) else (int(lev[0]), int(lev[1]))
        if pair in norm:
            raise ConfigError(f"duplicate mesh level {pair}")
        norm.append(pair)
    if not norm:
        raise ConfigError("need at least one mesh level")

    t_end = setup.t_end if cfg.t_end is None else cfg.t_end
    errors = np.zeros((len(norm), 8))
    eps = np.zeros(len(norm))
    hs = np.zeros(len(norm))
    for i, (nx, ny) in enumerate(norm):
        _, scheme = build_scheme(replace(cfg, nx=nx, ny=ny))
        rec = scheme.run(t_end, max_steps=cfg.max_steps)
        if not rec.ok:
            raise RuntimeError(f"level {nx}x{ny} aborted: {rec.violation}")
        xc, yc = scheme.mesh.primal_centers()
        nq = cfg.k + 2
        xg, wg = np.polynomial.legendre.leggauss(nq)
        xq = (xc[:, None] + 0.5 * scheme.mesh.dx * xg[None, :]).ravel()
        yq = (yc[:, None] + 0.5 * scheme.mesh.dy * xg[None, :]).ravel()
        x = np.tile(xq, yq.size)
        y = np.repeat(yq, xq.size)
        num = scheme.primal.evaluate(x, y)
        if reference == "advected":
            exact = np.asarray(setup.reference(x, y, scheme.t), dtype=float)
        else:
            exact = np.asarray(setup.init(x, y), dtype=float)
        # weights for the tensor rule, normalized so they sum to 1
        w2 = np.outer(np.tile(wg, yc.size), np.tile(wg, xc.size)).ravel()
        w2 /= w2.sum()
        errors[i] = w2 @ np.abs(num - exact)
        eps[i] = scheme.eps_div_now()
        hs[i] = scheme.mesh.dx

    nrate = len(norm) - 1
    rates = np.zeros((nrate, 8))
    eps_rates = np.zeros(nrate)
    for i in range(nrate):
        if hs[i] == hs[i + 1]:
            raise ConfigError("consecutive levels must differ in resolution")
        denom = np.log(hs[i] / hs[i + 1])
        with np.errstate(divide="ignore", invalid="ignore"):
            rates[i] = np.log(errors[i] / errors[i + 1]) / denom
            eps_rates[i] = np.log(eps[i] / eps[i + 1]) / denom
    return ConvergenceReport(cfg.problem, reference, norm, errors, rates, eps, eps_rates)

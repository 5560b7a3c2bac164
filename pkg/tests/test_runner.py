import json

import numpy as np
import pytest

from cdgmhd.config import RunConfig
from cdgmhd.runner import (
    DIAG_HEADER,
    EXIT_CONFIG,
    EXIT_INADMISSIBLE,
    EXIT_IO,
    EXIT_OK,
    SNAPSHOT_HEADER,
    build_scheme,
    convergence_study,
    run,
)


def read_csv(path):
    lines = path.read_text().strip().splitlines()
    header = lines[0]
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


def test_initial_snapshot_only_at_zero_t_end(tmp_path):
    cfg = RunConfig(problem="vortex", nx=6, ny=5, t_end=0.0, out=str(tmp_path / "o"))
    result = run(cfg)
    assert result.status == EXIT_OK
    assert result.steps == 0
    header, rows = read_csv(tmp_path / "o" / "snapshot_0000.csv")
    assert header == SNAPSHOT_HEADER
    assert len(rows) == 6 * 5
    # all rows carry t = 0 and positive density
    assert all(float(r[0]) == 0.0 for r in rows)
    assert all(float(r[3]) > 0.0 for r in rows)
    dheader, drows = read_csv(tmp_path / "o" / "diagnostics.csv")
    assert dheader == DIAG_HEADER
    assert drows == []
    manifest = json.loads((tmp_path / "o" / "run.json").read_text())
    assert manifest["status"] == 0
    assert manifest["snapshots"] == 1
    assert not (tmp_path / "o" / "snapshot_0001.csv").exists()


def test_oversample_row_count(tmp_path):
    cfg = RunConfig(
        problem="vortex", nx=4, ny=3, k=2, t_end=0.0, oversample=True,
        out=str(tmp_path / "o"),
    )
    assert run(cfg).status == EXIT_OK
    _, rows = read_csv(tmp_path / "o" / "snapshot_0000.csv")
    # centers plus the 3x3 uniform block minus its duplicated center
    assert len(rows) == 4 * 3 * 9


def test_snapshot_pressure_column_consistency(tmp_path):
    cfg = RunConfig(problem="orszag_tang", nx=8, ny=8, k=1, t_end=0.0, out=str(tmp_path / "o"))
    assert run(cfg).status == EXIT_OK
    _, rows = read_csv(tmp_path / "o" / "snapshot_0000.csv")
    g = 5.0 / 3.0
    for r in rows[:10]:
        vals = [float(v) for v in r]
        _, _, _, rho, m1, m2, m3, b1, b2, b3, en, p = vals
        e = en - 0.5 * (m1**2 + m2**2 + m3**2) / rho - 0.5 * (b1**2 + b2**2 + b3**2)
        assert p == pytest.approx((g - 1.0) * e, rel=1e-12)


def test_short_run_writes_monotone_diagnostics(tmp_path):
    cfg = RunConfig(
        problem="vortex", nx=8, ny=8, k=1, t_end=0.2,
        snapshot_every=2, out=str(tmp_path / "o"),
    )
    result = run(cfg)
    assert result.status == EXIT_OK
    assert result.t == pytest.approx(0.2, rel=1e-12)
    _, drows = read_csv(tmp_path / "o" / "diagnostics.csv")
    assert len(drows) == result.steps
    ts = [float(r[0]) for r in drows]
    assert all(b > a for a, b in zip(ts, ts[1:]))
    assert ts[-1] == pytest.approx(0.2, rel=1e-12)
    dts = [float(r[1]) for r in drows]
    assert all(d > 0 for d in dts)
    min_rho = [float(r[3]) for r in drows]
    min_p = [float(r[4]) for r in drows]
    assert all(v > 0 for v in min_rho + min_p)
    manifest = json.loads((tmp_path / "o" / "run.json").read_text())
    assert manifest["steps"] == result.steps
    assert manifest["failure"] is None
    # initial plus final plus any cadence snapshots strictly inside the run
    cadence = sum(1 for s in range(1, result.steps) if s % 2 == 0)
    assert manifest["snapshots"] == 2 + cadence
    for i in range(manifest["snapshots"]):
        assert (tmp_path / "o" / f"snapshot_{i:04d}.csv").exists()


def test_run_is_deterministic(tmp_path):
    cfg_a = RunConfig(problem="rotor", nx=10, ny=10, k=1, t_end=0.01, out=str(tmp_path / "a"))
    cfg_b = RunConfig(problem="rotor", nx=10, ny=10, k=1, t_end=0.01, out=str(tmp_path / "b"))
    assert run(cfg_a).status == EXIT_OK
    assert run(cfg_b).status == EXIT_OK
    snap_a = (tmp_path / "a" / "snapshot_0001.csv").read_bytes()
    snap_b = (tmp_path / "b" / "snapshot_0001.csv").read_bytes()
    assert snap_a == snap_b


def test_restart_is_bitwise(tmp_path):
    base = dict(problem="vortex", nx=8, ny=8, k=1, t_end=0.4)
    cfg_full = RunConfig(**base, checkpoint_every=3, out=str(tmp_path / "full"))
    result = run(cfg_full)
    assert result.status == EXIT_OK
    assert result.steps > 3
    mid = tmp_path / "full" / "checkpoint_000003.npz"
    assert mid.exists()

    cfg_resume = RunConfig(**base, resume=str(mid), out=str(tmp_path / "resumed"))
    res2 = run(cfg_resume)
    assert res2.status == EXIT_OK
    with np.load(tmp_path / "full" / "checkpoint_final.npz") as a, \
         np.load(tmp_path / "resumed" / "checkpoint_final.npz") as b:
        assert a["t"] == b["t"]
        assert int(a["steps"]) == int(b["steps"])
        assert np.array_equal(a["primal"], b["primal"])
        assert np.array_equal(a["dual"], b["dual"])


def test_resume_rejects_mismatched_setup(tmp_path):
    cfg = RunConfig(problem="vortex", nx=6, ny=6, k=1, t_end=0.0,
                    checkpoint_every=0, out=str(tmp_path / "o"))
    assert run(cfg).status == EXIT_OK
    ckpt = str(tmp_path / "o" / "checkpoint_final.npz")
    other = RunConfig(problem="vortex", nx=12, ny=12, k=1, t_end=0.1,
                      resume=ckpt, out=str(tmp_path / "p"))
    result = run(other)
    assert result.status == EXIT_CONFIG
    assert "checkpoint" in result.failure["message"]


def test_config_failure_exit(tmp_path):
    result = run(RunConfig(problem="no_such", out=str(tmp_path / "o")))
    assert result.status == EXIT_CONFIG
    assert result.failure["kind"] == "config"


def test_io_failure_exit():
    cfg = RunConfig(problem="vortex", nx=4, ny=4, t_end=0.0, out="/dev/null/sub")
    result = run(cfg)
    assert result.status == EXIT_IO
    assert result.failure["kind"] == "io"


def test_unlimited_blast_aborts_with_record(tmp_path):
    cfg = RunConfig(
        problem="blast_extreme", nx=16, ny=16, k=2, limiter=False,
        t_end=1e-4, out=str(tmp_path / "o"),
    )
    result = run(cfg)
    assert result.status == EXIT_INADMISSIBLE
    assert result.failure["kind"] in ("inadmissible", "nonfinite")
    record = json.loads((tmp_path / "o" / "failure.json").read_text())
    assert record["kind"] == result.failure["kind"]
    assert record["step"] >= 1
    manifest = json.loads((tmp_path / "o" / "run.json").read_text())
    assert manifest["status"] == EXIT_INADMISSIBLE


def test_max_steps_reported_as_incomplete(tmp_path):
    cfg = RunConfig(problem="vortex", nx=6, ny=6, k=1, t_end=1.0,
                    max_steps=2, out=str(tmp_path / "o"))
    result = run(cfg)
    assert result.status == EXIT_INADMISSIBLE
    assert result.failure["kind"] == "incomplete"


# ------------------------------------------------------------- convergence


def test_convergence_study_reports_reference(tmp_path):
    cfg = RunConfig(problem="vortex", k=1, t_end=0.025)
    report = convergence_study(cfg, [6, 8])
    assert report.reference == "advected"
    assert report.errors.shape == (2, 8)
    assert np.isfinite(report.errors).all()
    assert report.rates.shape == (1, 8)
    table = report.table()
    assert table.startswith("cells,rho,m1,")
    assert "6x6" in table and "8x8" in table

    stat = convergence_study(cfg, [6, 8], reference="stationary")
    assert stat.reference == "stationary"
    # the references genuinely differ
    assert not np.allclose(stat.errors, report.errors)


def test_convergence_study_rejections():
    from cdgmhd.config import ConfigError

    cfg = RunConfig(problem="rotor", t_end=0.0)
    with pytest.raises(ConfigError, match="no exact solution"):
        convergence_study(cfg, [6, 8])
    vcfg = RunConfig(problem="vortex", t_end=0.0)
    with pytest.raises(ConfigError, match="duplicate"):
        convergence_study(vcfg, [6, 6])
    with pytest.raises(ConfigError, match="reference"):
        convergence_study(vcfg, [6, 8], reference="measured")
    rcfg = RunConfig(problem="riemann_vacuum", t_end=0.0)
    with pytest.raises(ConfigError, match="2D"):
        convergence_study(rcfg, [6, 8])


def test_build_scheme_resolves_default_cells():
    setup, scheme = build_scheme(RunConfig(problem="rotor", k=0))
    assert (scheme.mesh.nx, scheme.mesh.ny) == (200, 200)
    setup, scheme = build_scheme(RunConfig(problem="riemann_vacuum", k=0))
    assert scheme.mesh.nx == 100

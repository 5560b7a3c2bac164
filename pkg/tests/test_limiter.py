"""Pointwise admissibility enforcement around cell averages."""

import numpy as np
import pytest

from cdgmhd import basis
from cdgmhd.limiter import (
    EPS_CAP,
    control_points_1d,
    control_points_2d,
    limit_blocks,
)
from cdgmhd.physics import NCOMP, conserved, internal_energy_density


def block_from_state(u, k=2, dim=1):
    m = basis.n_modes_1d(k) if dim == 1 else basis.n_modes_2d(k)
    c = np.zeros((1, NCOMP, m))
    c[0, :, 0] = u
    return c


def point_states(c, table):
    return np.einsum("ncm,mp->npc", c, table)


class TestNoOp:
    def test_comfortable_cells_pass_untouched(self, eos, rng):
        k = 2
        tab = control_points_1d(k)
        c = np.zeros((4, NCOMP, k + 1))
        for n in range(4):
            c[n, :, 0] = conserved(2.0, rng.normal(size=3) * 0.1,
                                   rng.normal(size=3) * 0.1, 1.5, eos)
            c[n, :, 1:] = rng.normal(size=(NCOMP, k)) * 1e-3
        before = c.copy()
        res = limit_blocks(c, tab)
        assert res.ok and res.limited == 0 and res.min_scale == 1.0
        assert np.array_equal(c, before)


class TestDensityStage:
    def test_negative_point_density_gets_scaled_to_the_floor(self, eos):
        k = 1
        tab = control_points_1d(k)
        c = block_from_state(conserved(1.0, np.zeros(3), np.zeros(3), 1.0, eos), k)
        c[0, 0, 1] = 2.0  # density hits 1 - 2*sqrt(3) < 0 at the left end
        res = limit_blocks(c, tab)
        assert res.ok and res.limited_density == 1
        rho = point_states(c, tab)[0, :, 0]
        assert rho.min() >= EPS_CAP * (1 - 1e-12)
        # The floor must be attained, not overshot: scaling is minimal.
        assert rho.min() <= EPS_CAP * (1 + 1e-6) or res.min_scale > 0

    def test_scale_matches_hand_formula(self, eos):
        k = 1
        tab = control_points_1d(k)
        c = block_from_state(conserved(1.0, np.zeros(3), np.zeros(3), 1.0, eos), k)
        slope = 2.0
        c[0, 0, 1] = slope
        rho_min = 1.0 - slope * np.sqrt(3.0)  # mode 1 is sqrt(3)*xi
        expect = (1.0 - EPS_CAP) / (1.0 - rho_min)
        res = limit_blocks(c, tab)
        assert c[0, 0, 1] == pytest.approx(slope * expect, rel=1e-13)
        assert res.min_scale == pytest.approx(expect, rel=1e-13)


class TestEnergyStage:
    def test_chord_rescue_restores_pointwise_internal_energy(self, eos, rng):
        k = 2
        tab = control_points_1d(k)
        c = block_from_state(
            conserved(1.0, np.array([0.5, 0, 0]), np.array([1.0, 0.2, 0]), 0.3, eos), k
        )
        c[0, 1, 1] = 3.0  # huge momentum slope drives kinetic energy over E
        c[0, 4, 2] = 1.5
        res = limit_blocks(c, tab)
        assert res.ok and res.limited_energy == 1
        pts = point_states(c, tab)[0]
        assert internal_energy_density(pts).min() > 0.0
        assert pts[:, 0].min() > 0.0

    def test_averages_never_move(self, eos, rng):
        k = 2
        tab = control_points_1d(k)
        c = np.zeros((3, NCOMP, k + 1))
        for n in range(3):
            c[n, :, 0] = conserved(1.0, rng.normal(size=3), rng.normal(size=3) * 0.5,
                                   0.2, eos)
            c[n, :, 1:] = rng.normal(size=(NCOMP, k)) * 2.0
        avg = c[..., 0].copy()
        limit_blocks(c, tab)
        assert np.array_equal(c[..., 0], avg)

    def test_tiny_average_margins_flatten_instead_of_failing(self, eos):
        k = 1
        tab = control_points_1d(k)
        c = block_from_state(conserved(1e-14, np.zeros(3), np.zeros(3),
                                       1e-14 * (eos.gamma - 1), eos), k)
        c[0, 0, 1] = 1e-13
        res = limit_blocks(c, tab)
        assert res.ok
        rho = point_states(c, tab)[0, :, 0]
        assert rho.min() > 0.0


class TestViolationSignal:
    def test_inadmissible_average_reports_the_cell(self, eos):
        k = 1
        tab = control_points_1d(k)
        good = block_from_state(conserved(1.0, np.zeros(3), np.zeros(3), 1.0, eos), k)
        bad = block_from_state(conserved(1.0, np.zeros(3), np.array([1.0, 0, 0]), 1.0, eos), k)
        bad[0, 7, 0] = 0.4  # total energy below the magnetic share alone
        c = np.concatenate([good, bad, good])
        res = limit_blocks(c, tab)
        assert not res.ok
        assert res.bad_cell == 1

    def test_nan_average_is_flagged_not_propagated(self, eos):
        k = 1
        tab = control_points_1d(k)
        c = block_from_state(conserved(1.0, np.zeros(3), np.zeros(3), 1.0, eos), k)
        c[0, 0, 0] = np.nan
        assert not limit_blocks(c, tab).ok


class TestSolenoidalInteraction:
    def test_limiting_keeps_the_magnetic_pair_solenoidal(self, eos, rng):
        k, dx, dy = 2, 0.4, 0.7
        tab = control_points_2d(k)
        m = basis.n_modes_2d(k)
        proj = basis.solenoidal_projector(k, dx, dy)
        c = np.zeros((5, NCOMP, m))
        for n in range(5):
            c[n, :, 0] = conserved(1.0, rng.normal(size=3), rng.normal(size=3) * 0.4,
                                   0.05, eos)
            c[n, :, 1:] = rng.normal(size=(NCOMP, m - 1)) * 1.5
            pair = np.concatenate([c[n, 4], c[n, 5]])
            pair = proj @ pair
            c[n, 4], c[n, 5] = pair[:m], pair[m:]
        res = limit_blocks(c, tab)
        assert res.ok and res.limited > 0
        for n in range(5):
            pair = np.concatenate([c[n, 4], c[n, 5]])
            assert np.allclose(proj @ pair, pair, atol=1e-13)


class TestPrefilter:
    def test_prefilter_path_matches_direct_scan(self, eos, rng):
        # Mix comfortable, marginal, violating, and inadmissible-average
        # cells so both prefilter outcomes and every scan branch appear.
        from cdgmhd.limiter import EPS_REL, _scan

        k = 2
        tab = control_points_2d(k)
        m = basis.n_modes_2d(k)
        nc = 400
        c = np.zeros((nc, NCOMP, m))
        for n in range(nc):
            kind = n % 4
            rho = 10.0 ** rng.uniform(-6, 2)
            p = 10.0 ** rng.uniform(-8, 2)
            c[n, :, 0] = conserved(rho, rng.normal(size=3) * rng.uniform(0, 3),
                                   rng.normal(size=3) * rng.uniform(0, 3), p, eos)
            amp = [1e-6, 0.3, 3.0, 0.0][kind]
            c[n, :, 1:] = rng.normal(size=(NCOMP, m - 1)) * amp * np.abs(c[n, :, :1])
        direct = c.copy()
        vals = (direct.reshape(nc * NCOMP, m) @ tab).reshape(nc, NCOMP, -1)
        b, nr, ne, ms = _scan(direct, vals, EPS_CAP, EPS_REL)
        res = limit_blocks(c, tab)
        assert res.bad_cell == b
        assert (res.limited_density, res.limited_energy) == (nr, ne)
        assert res.min_scale == ms
        assert np.array_equal(c, direct)

"""Energy/entropy ledgers, pressure diagnostics, shape metrics."""

import numpy as np
import pytest

from difflow import diagnostics as dg
from difflow import eos, grid as gr
from difflow.grid import BoundarySpec
from difflow.integrator import SchemeConfig, SimState, TwoPhaseIntegrator

N_G, N_L = 358.2996, 9058.3724


@pytest.fixture(scope="module")
def pr():
    return eos.PengRobinson(eos.n_butane())


def centered_grid(n=12, L=2e-8):
    return gr.Grid(nx=n, ny=n, Lx=L, Ly=L, origin=(-L / 2, -L / 2))


def droplet_state(pr, g, r_frac=0.35):
    x, y = g.cell_centers()
    r = r_frac * g.Lx / 2
    inside = (np.abs(x)[:, None] <= r) & (np.abs(y)[None, :] <= r)
    return SimState.create(pr, g, np.where(inside, N_L, N_G),
                           np.full((g.nx, g.ny), 345.0))


class TestEnergies:
    def test_zero_velocity_zero_kinetic(self, pr):
        g = centered_grid()
        s = droplet_state(pr, g)
        H, _, _, E = dg.energies(s)
        assert H == 0.0
        assert E == dg.energies(s)[1]

    def test_uniform_physical_energy(self, pr):
        g = centered_grid()
        s = SimState.create(pr, g, np.full((g.nx, g.ny), 5000.0),
                            np.full((g.nx, g.ny), 345.0))
        _, _, U_phys, _ = dg.energies(s)
        want = float(pr.internal_energy_bulk(5000.0, 345.0)) * g.Lx * g.Ly
        assert U_phys == pytest.approx(want, rel=1e-12)

    def test_scheme_energy_approaches_physical_with_tight_tol(self, pr):
        g = centered_grid()
        gaps = {}
        for tol in (1e-3, 1e-8):
            cfg = SchemeConfig(dt=3e-13, eta=1e-4, xi=1e-4, heat_coeff=0.1,
                               outer_tol=tol, max_outer_iters=60)
            integ = TwoPhaseIntegrator(pr, g, BoundarySpec.adiabatic(), cfg)
            s2, _ = integ.outer_iterate(droplet_state(pr, g))
            _, U_scheme, U_phys, _ = dg.energies(s2)
            gaps[tol] = abs(U_scheme - U_phys)
        assert gaps[1e-8] < gaps[1e-3]
        assert gaps[1e-8] < 1e-6 * abs(dg.energies(droplet_state(pr, g))[2])


class TestEntropy:
    def test_uniform_gradient_part_vanishes(self, pr):
        g = centered_grid()
        s = SimState.create(pr, g, np.full((g.nx, g.ny), 5000.0),
                            np.full((g.nx, g.ny), 345.0))
        want = float(pr.gamma_s_bulk(5000.0, 345.0)[1]) * g.Lx * g.Ly
        assert dg.entropy_total(s) == pytest.approx(want, rel=1e-12)

    def test_integrand_is_minus_gamma(self, pr):
        g = centered_grid()
        s = droplet_state(pr, g)
        assert np.max(np.abs(s.s + s.gamma)) == 0.0

    def test_stationary_residuals_zero(self, pr):
        g = centered_grid()
        cfg = SchemeConfig(dt=3e-13, eta=1e-4, xi=1e-4, heat_coeff=0.1)
        integ = TwoPhaseIntegrator(pr, g, BoundarySpec.adiabatic(), cfg)
        s = SimState.create(pr, g, np.full((g.nx, g.ny), 5000.0),
                            np.full((g.nx, g.ny), 345.0))
        rec0 = dg.make_record(s, None, 0.0, cfg.dt, 0)
        s2, rep = integ.outer_iterate(s)
        rec1 = dg.make_record(s2, rec0, 0.0, cfg.dt, rep.outer_iters)
        assert abs(rec1.first_law_residual) < 1e-12 * abs(rec0.E)
        assert abs(rec1.entropy_increment) < 1e-10 * abs(rec0.S)


class TestRecord:
    def test_energy_sum_identity(self, pr):
        g = centered_grid()
        s = droplet_state(pr, g)
        rec = dg.make_record(s, None, 0.0, 3e-13, 0)
        assert rec.E == rec.H + rec.U_scheme
        for name in dg.DiagnosticsRecord.FIELDS:
            assert np.isfinite(getattr(rec, name))


class TestPressureField:
    def test_uniform_equals_bulk(self, pr):
        g = centered_grid()
        s = SimState.create(pr, g, np.full((g.nx, g.ny), 5000.0),
                            np.full((g.nx, g.ny), 345.0))
        p = dg.pressure_field(pr, s)
        assert np.allclose(p, pr.p_bulk(5000.0, 345.0), rtol=1e-12)

    def test_interface_carries_gradient_corrections(self, pr):
        g = centered_grid(24)
        s = droplet_state(pr, g)
        p = dg.pressure_field(pr, s)
        p_b = pr.p_bulk(s.n, s.T)
        assert np.max(np.abs(p - p_b)) > 1e3 * np.max(
            np.abs(p - p_b)[s.grad_n_sq == 0.0].max())

    def test_gradient_relation_second_order(self, pr):
        errs = []
        for m in (32, 64, 128):
            g = gr.Grid(nx=m, ny=3, Lx=2e-8, Ly=2e-8 * 3 / m,
                        origin=(-1e-8, 0.0))
            x, _ = g.cell_centers()
            prof = 0.5 * (N_L + N_G) - 0.5 * (N_L - N_G) * np.tanh(
                x / (g.Lx / 12.0))
            s = SimState.create(pr, g, prof[:, None] * np.ones((1, 3)),
                                np.full((m, 3), 345.0))
            rx, ry = dg.gradient_relation_residual(pr, s)
            errs.append(np.max(np.abs(rx)))
        orders = np.log2(errs[0] / errs[1]), np.log2(errs[1] / errs[2])
        assert min(orders) >= 1.9


class TestShapeMetrics:
    def test_square_droplet(self, pr):
        g = centered_grid(40)
        s = droplet_state(pr, g, r_frac=0.35)
        m = dg.shape_metrics(s, 0.5 * (N_G + N_L), phase="dense")
        x, _ = g.cell_centers()
        cells = np.count_nonzero(np.abs(x) <= 0.35 * g.Lx / 2)
        assert m.phase_area == pytest.approx(cells**2 * g.cell_volume, rel=1e-12)
        assert m.centroid[0] == pytest.approx(0.0, abs=1e-12 * g.Lx)
        assert m.centroid[1] == pytest.approx(0.0, abs=1e-12 * g.Ly)
        assert m.circularity < 1.0

    def test_disk_rounder_than_square(self, pr):
        g = centered_grid(60)
        x, y = g.cell_centers()
        r = 0.3 * g.Lx
        sq = (np.abs(x)[:, None] <= r) & (np.abs(y)[None, :] <= r)
        dk = np.hypot(x[:, None], y[None, :]) <= r
        T = np.full((g.nx, g.ny), 345.0)
        s_sq = SimState.create(pr, g, np.where(sq, N_L, N_G), T)
        s_dk = SimState.create(pr, g, np.where(dk, N_L, N_G), T)
        thr = 0.5 * (N_G + N_L)
        c_sq = dg.shape_metrics(s_sq, thr).circularity
        c_dk = dg.shape_metrics(s_dk, thr).circularity
        assert c_dk > c_sq

    def test_light_phase_and_empty_error(self, pr):
        g = centered_grid(24)
        x, y = g.cell_centers()
        bubble = np.hypot(x[:, None], y[None, :]) <= 0.3 * g.Lx
        s = SimState.create(pr, g, np.where(bubble, N_G, N_L),
                            np.full((g.nx, g.ny), 345.0))
        m = dg.shape_metrics(s, 0.5 * (N_G + N_L), phase="light")
        assert m.phase_area > 0.0
        uniform = SimState.create(pr, g, np.full((g.nx, g.ny), N_L),
                                  np.full((g.nx, g.ny), 345.0))
        with pytest.raises(ValueError, match="empty"):
            dg.shape_metrics(uniform, 0.5 * (N_G + N_L), phase="light")

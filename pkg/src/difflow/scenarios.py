"""Scenario builders and the run loop with CSV outputs."""

from __future__ import annotations

import os
import sys

import numpy as np

from . import diagnostics as dg
from . import grid as gr
from .config import ScenarioConfig
from .eos import PengRobinson
from .grid import BoundarySpec, EdgeBC, Grid
from .integrator import SchemeConfig, SimState, StepFailure, TwoPhaseIntegrator


def init_isolated_square(pr: PengRobinson, cfg: ScenarioConfig):
    """Liquid square of half-width r_frac*L centered in a gas background;
    uniform temperature, adiabatic walls."""
    g = cfg.grid
    sc = cfg.scenario
    L = g.Lx / 2.0
    r = sc.r_frac * L
    if r >= L or sc.r_frac * g.Ly / 2.0 >= g.Ly / 2.0:
        raise ValueError("droplet radius must be smaller than the half-domain")
    x, y = g.cell_centers()
    inside = (np.abs(x)[:, None] <= r) & (np.abs(y)[None, :] <= r)
    n = np.where(inside, sc.n_liquid, sc.n_gas)
    T = np.full((g.nx, g.ny), sc.T_init)
    state = SimState.create(pr, g, n, T)
    return state, BoundarySpec.adiabatic()


def init_bubble_tanh(pr: PengRobinson, cfg: ScenarioConfig):
    """Gas bubble from a sharp tanh radial profile; insulated sides, fixed
    temperatures on top and bottom walls."""
    g = cfg.grid
    sc = cfg.scenario
    L = g.Lx / 2.0
    r = sc.r_frac * L
    if r >= L:
        raise ValueError("bubble radius must be smaller than the half-domain")
    x, y = g.cell_centers()
    d = np.hypot(x[:, None], y[None, :])
    n = 0.5 * (sc.n_liquid + sc.n_gas) \
        + 0.5 * (sc.n_liquid - sc.n_gas) * np.tanh(sc.w * (d - r) / L)
    T = np.full((g.nx, g.ny), sc.T_init)
    state = SimState.create(pr, g, n, T)
    bc = BoundarySpec(temperature={
        "left": EdgeBC("neumann", 0.0), "right": EdgeBC("neumann", 0.0),
        "top": EdgeBC("dirichlet", sc.T_top),
        "bottom": EdgeBC("dirichlet", sc.T_bottom)})
    return state, bc


def init_custom(pr: PengRobinson, cfg: ScenarioConfig):
    """Uniform state: the stationarity smoke configuration."""
    g = cfg.grid
    sc = cfg.scenario
    n = np.full((g.nx, g.ny), sc.n_init)
    T = np.full((g.nx, g.ny), sc.T_init)
    return SimState.create(pr, g, n, T), BoundarySpec.adiabatic()


_BUILDERS = {
    "isolated_square": init_isolated_square,
    "bubble_tanh": init_bubble_tanh,
    "custom": init_custom,
}


def build_initial(cfg: ScenarioConfig):
    pr = PengRobinson(cfg.substance)
    state, bc = _BUILDERS[cfg.scenario.kind](pr, cfg)
    return pr, state, bc


def _f17(x) -> str:
    return format(float(x), ".17g")


def write_snapshot(path: str, pr: PengRobinson, state: SimState) -> None:
    g = state.grid
    x, y = g.cell_centers()
    ux = 0.5 * (state.u.fx[:-1, :] + state.u.fx[1:, :])
    uy = 0.5 * (state.u.fy[:, :-1] + state.u.fy[:, 1:])
    p = dg.pressure_field(pr, state)
    with open(path, "w", newline="") as fh:
        fh.write("i,j,x,y,n,T,ux,uy,p\n")
        for i in range(g.nx):
            for j in range(g.ny):
                fh.write(",".join([
                    str(i), str(j), _f17(x[i]), _f17(y[j]),
                    _f17(state.n[i, j]), _f17(state.T[i, j]),
                    _f17(ux[i, j]), _f17(uy[i, j]), _f17(p[i, j])]) + "\n")


def _diag_row(rec: dg.DiagnosticsRecord) -> str:
    vals = []
    for name in dg.DiagnosticsRecord.FIELDS:
        v = getattr(rec, name)
        vals.append(str(v) if isinstance(v, int) else _f17(v))
    return ",".join(vals) + "\n"


def run(cfg: ScenarioConfig, out_dir: str | None = None, echo=None) -> int:
    """Run the configured scenario; returns the process exit status
    (0 success, 3 on solver abort with partial outputs retained)."""
    echo = echo or (lambda msg: print(msg, file=sys.stderr))
    out = out_dir or cfg.run.output_dir
    os.makedirs(out, exist_ok=True)

    pr, state, bc = build_initial(cfg)
    integ = TwoPhaseIntegrator(pr, cfg.grid, bc, cfg.scheme)
    every = cfg.run.snapshot_every
    n_steps = cfg.run.n_steps

    def snap(s):
        write_snapshot(os.path.join(out, f"fields_{s.step_index:06d}.csv"), pr, s)

    status = 0
    with open(os.path.join(out, "diagnostics.csv"), "w", newline="") as diag:
        diag.write(",".join(dg.DiagnosticsRecord.FIELDS) + "\n")
        rec = dg.make_record(state, None, 0.0, cfg.scheme.dt, 0)
        diag.write(_diag_row(rec))
        snap(state)
        for _ in range(n_steps):
            prev = state
            try:
                state, report = integ.advance(state)
            except StepFailure as err:
                echo(f"aborted: {err}")
                status = 3
                break
            heat_k = integ.theta_fn(prev.n, prev.T)
            bh_rate = gr.boundary_heat_flux(cfg.grid, state.T, heat_k, bc)
            rec = dg.make_record(state, rec, bh_rate, state.time - prev.time,
                                 report.outer_iters)
            diag.write(_diag_row(rec))
            diag.flush()
            if every > 0 and state.step_index % every == 0:
                snap(state)
        if state.step_index > 0 and not (every > 0 and state.step_index % every == 0):
            snap(state)
    return status

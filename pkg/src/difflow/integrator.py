"""Semi-implicit convex-concave time scheme with an auxiliary velocity.

One outer iteration advances, in order: the coupled (density, chemical
potential) solve with the auxiliary velocity eliminated, the auxiliary
velocity itself, the momentum solve written in auxiliary-velocity form, and
the linearized energy solve.  In skew convection mode every pairing of the
discrete energy ledger cancels exactly, so total energy changes only by the
boundary heat flux, to solver precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import grid as gr
from .eos import PengRobinson, ThermoDomainError
from .grid import BoundarySpec, FaceField, Grid


class StepFailure(RuntimeError):
    """A step could not be completed after the dt-halving retries."""


@dataclass(frozen=True)
class SchemeConfig:
    dt: float                      # s
    eta: float                     # Pa s, shear viscosity
    xi: float                      # Pa s, volumetric viscosity
    heat_coeff: float              # W/m/K
    outer_tol: float = 1e-3
    max_outer_iters: int = 10
    linear_tol: float = 1e-10
    convection_mode: str = "skew"  # or "upwind"
    linear_solver: str = "direct"  # or "iterative"
    gamma_t_field: str = "prev_iter"  # or "time_k"

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.outer_tol <= 0.0:
            raise ValueError("outer_tol must be positive")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be at least 1")
        if self.xi <= 2.0 / 3.0 * self.eta:
            raise ValueError("need xi > (2/3) eta")
        if self.convection_mode not in ("skew", "upwind"):
            raise ValueError(f"unknown convection_mode {self.convection_mode!r}")
        if self.linear_solver not in ("direct", "iterative"):
            raise ValueError(f"unknown linear_solver {self.linear_solver!r}")
        if self.gamma_t_field not in ("prev_iter", "time_k"):
            raise ValueError(f"unknown gamma_t_field {self.gamma_t_field!r}")

    @property
    def lam(self) -> float:
        return self.xi - 2.0 / 3.0 * self.eta


@dataclass
class SimState:
    grid: Grid
    n: np.ndarray                  # mol/m^3
    T: np.ndarray                  # K
    u: FaceField                   # m/s
    time: float = 0.0
    step_index: int = 0
    # caches, consistent with (n, T, u) after every accepted step
    rho: np.ndarray = None         # kg/m^3
    s: np.ndarray = None           # J/m^3/K, total entropy density
    gamma: np.ndarray = None       # -s
    mu: np.ndarray = None          # J/mol, bulk + gradient chemical potential
    theta: np.ndarray = None       # J/m^3, physical internal energy density
    theta_scheme: np.ndarray = None  # linearized internal energy at acceptance
    grad_n_sq: np.ndarray = None   # (mol/m^3/m)^2 at cells

    @classmethod
    def create(cls, pr: PengRobinson, g: Grid, n, T, u: FaceField | None = None,
               time: float = 0.0, step_index: int = 0) -> "SimState":
        state = cls(grid=g, n=np.array(n, dtype=float), T=np.array(T, dtype=float),
                    u=u.copy() if u is not None else FaceField.zeros(g),
                    time=time, step_index=step_index)
        state.u.clear_boundary()
        refresh_caches(pr, state)
        state.theta_scheme = state.theta.copy()
        return state


def refresh_caches(pr: PengRobinson, state: SimState) -> None:
    g = state.grid
    pr.check_point(state.n, state.T)
    grad_n = gr.grad_cell_to_face(g, state.n)
    state.grad_n_sq = gr.cell_mean_of_face_squares(g, grad_n)
    c, c1, _ = pr.influence_param(state.T)
    gamma_b, _ = pr.gamma_s_bulk(state.n, state.T)
    state.gamma = gamma_b + 0.5 * c1 * state.grad_n_sq
    state.s = -state.gamma
    c_f = gr.face_average(g, c)
    mu_grad = -gr.div_face_to_cell(g, FaceField(c_f.fx * grad_n.fx, c_f.fy * grad_n.fy))
    state.mu = pr.mu_bulk(state.n, state.T)[0] + mu_grad
    state.theta = (pr.internal_energy_bulk(state.n, state.T)
                   + 0.5 * (c - state.T * c1) * state.grad_n_sq)
    state.rho = state.n * pr.substance.molar_weight


@dataclass
class IterationReport:
    outer_iters: int = 0
    rel_changes: list = field(default_factory=list)   # (n, u, T) per iteration
    linear_iters: list = field(default_factory=list)
    converged: bool = False
    nonmonotone: bool = False

    def record(self, rel_n, rel_u, rel_T):
        prev = self.rel_changes[-1] if self.rel_changes else None
        self.rel_changes.append((rel_n, rel_u, rel_T))
        self.outer_iters += 1
        if prev is not None and max(rel_n, rel_u, rel_T) > max(prev):
            self.nonmonotone = True


@dataclass
class LinearReport:
    method: str
    iterations: int
    residual: float


def linear_solve(A, b, tol, method="direct", permc_spec="COLAMD"):
    """Solve A x = b; direct sparse LU or ILU-preconditioned GMRES.

    Both paths are deterministic for fixed inputs.  Non-convergence is
    reported with the final residual rather than silently accepted.
    permc_spec only affects direct-path fill (COLAMD suits the 2-field
    saddle system; MMD_AT_PLUS_A the near-symmetric momentum/energy ones).
    """
    A = A.tocsc()
    b = np.asarray(b, dtype=float)
    bnorm = np.linalg.norm(b)
    if method == "direct":
        x = spla.splu(A, permc_spec=permc_spec).solve(b)
        res = np.linalg.norm(A @ x - b)
        return x, LinearReport("direct", 1, float(res / (bnorm + 1e-300)))
    if method != "iterative":
        raise ValueError(f"unknown linear solver {method!r}")
    ilu = spla.spilu(A, drop_tol=1e-8, fill_factor=20)
    M = spla.LinearOperator(A.shape, ilu.solve)
    count = [0]

    def cb(_):
        count[0] += 1

    x, info = spla.gmres(A, b, rtol=tol, atol=0.0, M=M, maxiter=500,
                         callback=cb, callback_type="legacy")
    res = float(np.linalg.norm(A @ x - b) / (bnorm + 1e-300))
    if info != 0 or res > tol:
        raise RuntimeError(
            f"iterative linear solve stagnated: info={info}, rel residual={res:.3e}")
    return x, LinearReport("iterative", count[0], res)


class TwoPhaseIntegrator:
    """Advances one simulation; operator structure is precomputed per grid."""

    def __init__(self, pr: PengRobinson, g: Grid, bc: BoundarySpec,
                 cfg: SchemeConfig, theta_fn=None):
        self.pr = pr
        self.g = g
        self.bc = bc
        self.cfg = cfg
        # heat conduction hook: in general Theta depends on (n, T)
        self.theta_fn = theta_fn or (
            lambda n, T: np.full_like(n, cfg.heat_coeff, dtype=float))
        self.Gx, self.Gy = gr.gradient_matrices(g)
        self.Dx, self.Dy = gr.divergence_matrices(g)
        eta_c = np.full((g.nx, g.ny), cfg.eta)
        lam_c = np.full((g.nx, g.ny), cfg.lam)
        self._eta_c, self._lam_c = eta_c, lam_c
        self._visc = gr.viscous_matrix(g, eta_c, lam_c)
        self._I_cells = sp.identity(g.nx * g.ny, format="csr")

    # -- helpers -------------------------------------------------------------

    def _div_w_grad(self, w: FaceField):
        """Sparse div(w grad .) for a given face coefficient field."""
        return (self.Dx @ sp.diags(w.fx.ravel()) @ self.Gx
                + self.Dy @ sp.diags(w.fy.ravel()) @ self.Gy)

    def _solve(self, A, b, permc_spec="COLAMD"):
        return linear_solve(A, b, self.cfg.linear_tol, self.cfg.linear_solver,
                            permc_spec)

    def mu_linearized(self, n_k, n_new, n_l, T_l):
        """Chemical potential linearized about (n_l, T_l); affine in n_new."""
        g = self.g
        _, mu_cx, _, dmu = self.pr.mu_bulk(n_l, T_l)
        mu_cc = self.pr.mu_bulk(n_k, T_l)[2]
        c_f = gr.face_average(g, self.pr.influence_param(T_l)[0])
        grad_new = gr.grad_cell_to_face(g, n_new)
        mu_grad = -gr.div_face_to_cell(
            g, FaceField(c_f.fx * grad_new.fx, c_f.fy * grad_new.fy))
        return mu_cx + dmu * (n_new - n_l) + mu_cc + mu_grad

    def _mass_face_density(self, state_k: SimState, u_sign: FaceField):
        """Face density of the mass flux: arithmetic in skew mode, upwind
        (w.r.t. the latest auxiliary velocity) in upwind mode."""
        if self.cfg.convection_mode == "upwind":
            return gr.face_upwind(self.g, state_k.n, u_sign)
        return gr.face_average(self.g, state_k.n)

    def density_chemical_solve(self, state_k: SimState, n_l, T_l, dt,
                               u_sign: FaceField, gT: FaceField | None = None):
        """Coupled 2-field solve for (n^{l+1}, mu^{l+1}).

        The auxiliary velocity is eliminated into the mass balance, giving a
        second-order block system; after the solve n is re-evaluated from the
        conservative flux divergence so total mass telescopes to roundoff.
        gT is the face temperature gradient entering u*; it must match the
        one used by the energy equation's gamma term for the ledger to close.
        """
        g, pr, Mw = self.g, self.pr, self.pr.substance.molar_weight
        N = g.nx * g.ny
        n_k = state_k.n
        n_avg = gr.face_average(g, n_k)
        flux_n = self._mass_face_density(state_k, u_sign)
        s_f = gr.face_average(g, state_k.s)
        if gT is None:
            gT = gr.grad_cell_to_face(g, T_l)

        # mass row: n/dt - div(flux_n * dt/(Mw) grad mu) = n_k/dt - div(flux_n u_k)
        #           + div(flux_n dt s_f/(Mw n_avg) grad T_l)
        w_mu = FaceField(flux_n.fx * dt / Mw, flux_n.fy * dt / Mw)
        A12 = -self._div_w_grad(w_mu)
        uk = state_k.u
        adv_k = gr.div_face_to_cell(g, FaceField(flux_n.fx * uk.fx, flux_n.fy * uk.fy))
        wsT = FaceField(flux_n.fx * dt * s_f.fx / (Mw * n_avg.fx) * gT.fx,
                        flux_n.fy * dt * s_f.fy / (Mw * n_avg.fy) * gT.fy)
        rhs1 = n_k.ravel() / dt - adv_k.ravel() \
            + gr.div_face_to_cell(g, wsT).ravel()

        # mu row: mu - dmu n + div(c grad n) = mu_cx(n_l) - dmu n_l + mu_cc(n_k)
        _, mu_cx, _, dmu = pr.mu_bulk(n_l, T_l)
        mu_cc = pr.mu_bulk(n_k, T_l)[2]
        c_f = gr.face_average(g, pr.influence_param(T_l)[0])
        A21 = -sp.diags(dmu.ravel()) + self._div_w_grad(c_f)
        rhs2 = (mu_cx - dmu * n_l + mu_cc).ravel()

        A = sp.bmat([[self._I_cells / dt, A12],
                     [A21, self._I_cells]], format="csc")
        x, rep = self._solve(A, np.concatenate([rhs1, rhs2]))
        mu_new = x[N:].reshape(g.nx, g.ny)

        u_star = self.compute_u_star(state_k, mu_new, gT, dt)
        mass_flux = FaceField(flux_n.fx * u_star.fx, flux_n.fy * u_star.fy)
        mass_div = gr.div_face_to_cell(g, mass_flux)
        n_new = n_k - dt * mass_div
        if not pr.in_domain(n_new, T_l):
            raise ThermoDomainError("density solve left the valid domain")
        return n_new, mu_new, mass_div, u_star, rep

    def compute_u_star(self, state_k: SimState, mu_new, gT: FaceField,
                       dt) -> FaceField:
        """u* = u_k - dt/rho (n grad mu + s grad T), zero on the walls."""
        g = self.g
        n_avg = gr.face_average(g, state_k.n)
        s_f = gr.face_average(g, state_k.s)
        rho_fx = n_avg.fx * self.pr.substance.molar_weight
        rho_fy = n_avg.fy * self.pr.substance.molar_weight
        gmu = gr.grad_cell_to_face(g, mu_new)
        out = FaceField(
            state_k.u.fx - dt / rho_fx * (n_avg.fx * gmu.fx + s_f.fx * gT.fx),
            state_k.u.fy - dt / rho_fy * (n_avg.fy * gmu.fy + s_f.fy * gT.fy))
        out.clear_boundary()
        return out

    def momentum_solve(self, state_k: SimState, u_star: FaceField, dt):
        """Implicit convection + viscosity in auxiliary-velocity form:
        rho (u - u*)/dt + rho u*.grad u - visc(u) = 0."""
        g = self.g
        rho_f = gr.face_average(g, state_k.rho)
        rho_packed = np.concatenate([rho_f.fx[1:-1, :].ravel(),
                                     rho_f.fy[:, 1:-1].ravel()])
        C = gr.convective_matrix(g, state_k.rho, u_star, self.cfg.convection_mode)
        A = sp.diags(rho_packed / dt) + C - self._visc
        rhs = rho_packed / dt * gr.pack_velocity(g, u_star)
        x, rep = self._solve(A, rhs, permc_spec="MMD_AT_PLUS_A")
        return gr.unpack_velocity(g, x), rep

    def energy_solve(self, state_k: SimState, n_new, u_star: FaceField,
                     u_new: FaceField, mu_new, mass_div, T_l, gT: FaceField, dt):
        """Linear solve for T^{l+1}: implicit heat diffusion and linearized
        internal energy, all remaining sources explicit."""
        g, pr = self.g, self.pr
        grad_n_new = gr.grad_cell_to_face(g, n_new)
        g2_new = gr.cell_mean_of_face_squares(g, grad_n_new)
        c, c1, c2 = pr.influence_param(T_l)
        theta_hat = (pr.internal_energy_bulk(n_new, T_l)
                     + 0.5 * (c - T_l * c1) * g2_new)
        cv = pr.dtheta_bulk_dT(n_new, T_l) - 0.5 * T_l * c2 * g2_new
        if np.any(cv <= 0.0):
            raise ThermoDomainError("non-positive volumetric heat capacity")

        # explicit sources
        adv = gr.upwind_div(g, state_k.s * T_l, u_star)
        mdiv_f = gr.face_average(g, mass_div)
        c_f = gr.face_average(g, c)
        comp = gr.div_face_to_cell(g, FaceField(
            mdiv_f.fx * c_f.fx * grad_n_new.fx, mdiv_f.fy * c_f.fy * grad_n_new.fy))
        gamma_f = gr.face_average(g, state_k.gamma)
        gamma_T = gr.face_products_to_cells(g, FaceField(
            gamma_f.fx * gT.fx * u_star.fx, gamma_f.fy * gT.fy * u_star.fy))
        heat_visc = gr.viscous_heating_cells(g, self._eta_c, self._lam_c, u_new)
        rho_f = gr.face_average(g, state_k.rho)
        du1 = u_new - u_star
        du2 = u_star - state_k.u
        kin = gr.face_products_to_cells(g, FaceField(
            rho_f.fx * (du1.fx**2 + du2.fx**2), rho_f.fy * (du1.fy**2 + du2.fy**2)))
        kin /= 2.0 * dt

        # implicit heat diffusion with temperature BCs
        heat_coeff_k = self.theta_fn(state_k.n, state_k.T)
        A_heat = self._div_w_grad(gr.face_average(g, heat_coeff_k))
        dir_diag = np.zeros((g.nx, g.ny))
        bc_rhs = np.zeros((g.nx, g.ny))
        edges = {
            "left": (np.s_[0, :], g.dx), "right": (np.s_[-1, :], g.dx),
            "bottom": (np.s_[:, 0], g.dy), "top": (np.s_[:, -1], g.dy)}
        for edge, (sl, delta) in edges.items():
            e = self.bc.temperature[edge]
            if e.kind == "dirichlet":
                coef = 2.0 * heat_coeff_k[sl] / delta**2
                dir_diag[sl] -= coef
                bc_rhs[sl] += coef * e.value
            else:
                bc_rhs[sl] -= e.value / delta
        A_heat = A_heat + sp.diags(dir_diag.ravel())

        A = sp.diags(cv.ravel() / dt) - A_heat
        rhs = ((cv * T_l + state_k.theta - theta_hat) / dt
               - adv - comp - mu_new * mass_div - gamma_T + heat_visc + kin
               + bc_rhs)
        x, rep = self._solve(A.tocsc(), rhs.ravel(), permc_spec="MMD_AT_PLUS_A")
        T_new = x.reshape(g.nx, g.ny)
        if np.any(T_new <= 0.0):
            raise ThermoDomainError("energy solve produced non-positive temperature")
        theta_scheme = theta_hat + cv * (T_new - T_l)
        return T_new, theta_scheme, rep

    # -- outer iteration -------------------------------------------------------

    def outer_iterate(self, state_k: SimState, dt=None):
        """One time step of the fully decoupled linearized iteration."""
        cfg = self.cfg
        dt = cfg.dt if dt is None else dt
        n_l, T_l, u_l = state_k.n, state_k.T, state_k.u
        u_sign = state_k.u
        report = IterationReport()
        result = None
        for _ in range(cfg.max_outer_iters):
            gT_force = gr.grad_cell_to_face(
                self.g, state_k.T if cfg.gamma_t_field == "time_k" else T_l)
            n_new, mu_new, mass_div, u_star, rep1 = self.density_chemical_solve(
                state_k, n_l, T_l, dt, u_sign, gT_force)
            u_new, rep2 = self.momentum_solve(state_k, u_star, dt)
            T_new, theta_scheme, rep3 = self.energy_solve(
                state_k, n_new, u_star, u_new, mu_new, mass_div, T_l, gT_force, dt)
            report.linear_iters.append(
                (rep1.iterations, rep2.iterations, rep3.iterations))

            rel_n = _rel_change(n_new - n_l, n_l, n_new)
            # velocities below u_floor cannot displace anything by a machine
            # epsilon of a cell per step; treat them as numerically zero
            u_floor = 1e-12 * min(self.g.dx, self.g.dy) / dt
            rel_u = _rel_change_face(u_new - u_l, u_l, u_new, u_floor)
            rel_T = _rel_change(T_new - T_l, T_l, T_new)
            report.record(rel_n, rel_u, rel_T)
            result = (n_new, T_new, u_new, mu_new, theta_scheme)
            n_l, T_l, u_l, u_sign = n_new, T_new, u_new, u_star
            if max(rel_n, rel_u, rel_T) <= cfg.outer_tol:
                report.converged = True
                break

        n_new, T_new, u_new, mu_new, theta_scheme = result
        state = SimState(grid=self.g, n=n_new, T=T_new, u=u_new,
                         time=state_k.time + dt, step_index=state_k.step_index + 1)
        refresh_caches(self.pr, state)
        state.theta_scheme = theta_scheme
        return state, report

    def advance(self, state_k: SimState):
        """outer_iterate with the step-rejection policy: halve dt on a domain
        violation, up to 3 retries, then abort."""
        dt = self.cfg.dt
        last_err = None
        for _ in range(4):
            try:
                return self.outer_iterate(state_k, dt)
            except ThermoDomainError as err:
                last_err = err
                dt *= 0.5
        raise StepFailure(
            f"step {state_k.step_index + 1} failed after 3 dt halvings: {last_err}")


def _rel_change(delta, prev, new):
    denom = max(float(np.linalg.norm(prev)), float(np.linalg.norm(new)), 1e-300)
    return float(np.linalg.norm(delta)) / denom


def _rel_change_face(delta: FaceField, prev: FaceField, new: FaceField,
                     floor: float):
    denom = max(prev.norm2(), new.norm2())
    if denom <= floor:
        return 0.0
    return delta.norm2() / denom

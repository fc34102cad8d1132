"""Uniform staggered (MAC) mesh and its discrete operators.

Scalars live at cell centers, shape (nx, ny); velocity components live on
faces: u_x on vertical faces (nx+1, ny), u_y on horizontal faces (nx, ny+1).
Boundary faces always carry zero velocity (no-slip walls).

The operators are built so that the discrete identities behind the step
ledger hold to roundoff:
  * div is the negative adjoint of grad under zero boundary normals,
  * the viscous operator is assembled from a quadratic dissipation form,
    so <Lu, u> = -Q(u) exactly,
  * the skew convective form satisfies <rho u*.grad u, u> =
    -1/2 <avg(div(rho u*)), |u|^2> exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

CellField = np.ndarray  # shape (nx, ny), [i, j] = (x index, y index)

EDGES = ("left", "right", "bottom", "top")


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    Lx: float              # m, full extent in x
    Ly: float              # m, full extent in y
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise ValueError("need at least 3 cells per direction")
        if self.Lx <= 0.0 or self.Ly <= 0.0:
            raise ValueError("domain extents must be positive")

    @property
    def dx(self) -> float:
        return self.Lx / self.nx

    @property
    def dy(self) -> float:
        return self.Ly / self.ny

    @property
    def cell_volume(self) -> float:
        return self.dx * self.dy

    def cell_centers(self):
        x = self.origin[0] + (np.arange(self.nx) + 0.5) * self.dx
        y = self.origin[1] + (np.arange(self.ny) + 0.5) * self.dy
        return x, y

    def zeros_cell(self) -> CellField:
        return np.zeros((self.nx, self.ny))


@dataclass
class FaceField:
    """Staggered vector field: fx on vertical faces, fy on horizontal faces."""

    fx: np.ndarray  # (nx+1, ny)
    fy: np.ndarray  # (nx, ny+1)

    @classmethod
    def zeros(cls, g: Grid) -> "FaceField":
        return cls(np.zeros((g.nx + 1, g.ny)), np.zeros((g.nx, g.ny + 1)))

    def copy(self) -> "FaceField":
        return FaceField(self.fx.copy(), self.fy.copy())

    def __add__(self, other):
        return FaceField(self.fx + other.fx, self.fy + other.fy)

    def __sub__(self, other):
        return FaceField(self.fx - other.fx, self.fy - other.fy)

    def __mul__(self, s: float):
        return FaceField(self.fx * s, self.fy * s)

    __rmul__ = __mul__

    def norm2(self) -> float:
        return math.sqrt(float(np.sum(self.fx**2) + np.sum(self.fy**2)))

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(self.fx))), float(np.max(np.abs(self.fy))))

    def clear_boundary(self) -> None:
        """Zero the wall-normal boundary faces (no-slip)."""
        self.fx[0, :] = 0.0
        self.fx[-1, :] = 0.0
        self.fy[:, 0] = 0.0
        self.fy[:, -1] = 0.0


@dataclass(frozen=True)
class EdgeBC:
    kind: str             # "neumann" (given boundary flux) or "dirichlet"
    value: float = 0.0    # q_B in W/m^2, or T_B in K

    def __post_init__(self):
        if self.kind not in ("neumann", "dirichlet"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")


@dataclass(frozen=True)
class BoundarySpec:
    """Per-edge temperature condition; velocity is no-slip and the density
    has zero normal gradient everywhere, so only T needs per-edge data."""

    temperature: dict[str, EdgeBC] = field(
        default_factory=lambda: {e: EdgeBC("neumann", 0.0) for e in EDGES})

    def __post_init__(self):
        if set(self.temperature) != set(EDGES):
            raise ValueError("temperature BC must cover exactly left/right/bottom/top")

    @classmethod
    def adiabatic(cls) -> "BoundarySpec":
        return cls()


# ---------------------------------------------------------------------------
# first-order operators
# ---------------------------------------------------------------------------

def grad_cell_to_face(g: Grid, s: CellField, bc: BoundarySpec | None = None) -> FaceField:
    """Two-point gradient on faces; walls get zero normal gradient unless a
    Dirichlet edge is supplied, which uses one-sided ghost reflection."""
    out = FaceField.zeros(g)
    out.fx[1:-1, :] = (s[1:, :] - s[:-1, :]) / g.dx
    out.fy[:, 1:-1] = (s[:, 1:] - s[:, :-1]) / g.dy
    if bc is not None:
        t = bc.temperature
        if t["left"].kind == "dirichlet":
            out.fx[0, :] = (s[0, :] - t["left"].value) / (0.5 * g.dx)
        if t["right"].kind == "dirichlet":
            out.fx[-1, :] = (t["right"].value - s[-1, :]) / (0.5 * g.dx)
        if t["bottom"].kind == "dirichlet":
            out.fy[:, 0] = (s[:, 0] - t["bottom"].value) / (0.5 * g.dy)
        if t["top"].kind == "dirichlet":
            out.fy[:, -1] = (t["top"].value - s[:, -1]) / (0.5 * g.dy)
    return out


def div_face_to_cell(g: Grid, f: FaceField) -> CellField:
    return (f.fx[1:, :] - f.fx[:-1, :]) / g.dx + (f.fy[:, 1:] - f.fy[:, :-1]) / g.dy


def face_average(g: Grid, s: CellField) -> FaceField:
    """Arithmetic cell-to-face average; boundary faces take the wall cell value."""
    out = FaceField.zeros(g)
    out.fx[1:-1, :] = 0.5 * (s[1:, :] + s[:-1, :])
    out.fx[0, :] = s[0, :]
    out.fx[-1, :] = s[-1, :]
    out.fy[:, 1:-1] = 0.5 * (s[:, 1:] + s[:, :-1])
    out.fy[:, 0] = s[:, 0]
    out.fy[:, -1] = s[:, -1]
    return out


def face_upwind(g: Grid, s: CellField, vel: FaceField) -> FaceField:
    """Upwind cell value on faces w.r.t. the face velocity sign."""
    out = face_average(g, s)
    out.fx[1:-1, :] = np.where(vel.fx[1:-1, :] > 0.0, s[:-1, :],
                               np.where(vel.fx[1:-1, :] < 0.0, s[1:, :],
                                        out.fx[1:-1, :]))
    out.fy[:, 1:-1] = np.where(vel.fy[:, 1:-1] > 0.0, s[:, :-1],
                               np.where(vel.fy[:, 1:-1] < 0.0, s[:, 1:],
                                        out.fy[:, 1:-1]))
    return out


def upwind_div(g: Grid, scalar: CellField, vel: FaceField) -> CellField:
    """Conservative divergence of (upwind scalar) * (face velocity)."""
    sf = face_upwind(g, scalar, vel)
    flux = FaceField(sf.fx * vel.fx, sf.fy * vel.fy)
    return div_face_to_cell(g, flux)


def cell_mean_of_face_squares(g: Grid, f: FaceField) -> CellField:
    """Per-cell |f|^2 as the mean of squared face values per direction.

    Summed against cell volumes this equals the face-based quadrature with
    arithmetically averaged cell weights, which is what the energy ledger
    uses; boundary faces count toward their single adjacent cell.
    """
    x2 = 0.5 * (f.fx[:-1, :] ** 2 + f.fx[1:, :] ** 2)
    y2 = 0.5 * (f.fy[:, :-1] ** 2 + f.fy[:, 1:] ** 2)
    return x2 + y2


def face_products_to_cells(g: Grid, f: FaceField) -> CellField:
    """Distribute per-face scalars to cells with half weight per side.

    Exactly total-preserving when boundary faces carry zeros, which holds
    for every product of the scheme (u*, u, grad n, grad T vanish there).
    """
    out = np.zeros((g.nx, g.ny))
    out += 0.5 * (f.fx[:-1, :] + f.fx[1:, :])
    out += 0.5 * (f.fy[:, :-1] + f.fy[:, 1:])
    return out


def domain_integral(g: Grid, s: CellField) -> float:
    # math.fsum: exactly-rounded, order-independent total
    return math.fsum(s.ravel()) * g.cell_volume


def face_inner(g: Grid, f1: FaceField, f2: FaceField) -> float:
    """<f1, f2> with the uniform face measure dx*dy."""
    return (math.fsum((f1.fx * f2.fx).ravel())
            + math.fsum((f1.fy * f2.fy).ravel())) * g.cell_volume


def varcoef_diffusion(g: Grid, coeff, s: CellField,
                      bc: BoundarySpec | None = None) -> CellField:
    """Flux-form div(coeff * grad s); cell coefficients are averaged to faces."""
    cf = face_average(g, coeff) if isinstance(coeff, np.ndarray) else coeff
    gr = grad_cell_to_face(g, s, bc)
    return div_face_to_cell(g, FaceField(cf.fx * gr.fx, cf.fy * gr.fy))


def boundary_heat_flux(g: Grid, T: CellField, theta_coeff: CellField,
                       bc: BoundarySpec, weight: CellField | None = None) -> float:
    """Integral of q.nu over the walls, q = -Theta grad T (W).

    Neumann edges contribute their prescribed q_B directly; Dirichlet edges
    use the half-cell discrete flux with the wall cell's conductivity.
    The optional weight (e.g. 1/T) is evaluated at the adjacent cell.
    """
    w = np.ones((g.nx, g.ny)) if weight is None else weight
    total = 0.0
    spec = bc.temperature

    def edge_terms(edge, T_row, th_row, w_row, half, length):
        e = spec[edge]
        if e.kind == "neumann":
            flux = np.full_like(T_row, e.value)
        else:
            flux = -th_row * (e.value - T_row) / half
        return math.fsum(flux * w_row) * length

    total += edge_terms("left", T[0, :], theta_coeff[0, :], w[0, :], 0.5 * g.dx, g.dy)
    total += edge_terms("right", T[-1, :], theta_coeff[-1, :], w[-1, :], 0.5 * g.dx, g.dy)
    total += edge_terms("bottom", T[:, 0], theta_coeff[:, 0], w[:, 0], 0.5 * g.dy, g.dx)
    total += edge_terms("top", T[:, -1], theta_coeff[:, -1], w[:, -1], 0.5 * g.dy, g.dx)
    return total


# ---------------------------------------------------------------------------
# sparse operator assembly (cell scalars)
# ---------------------------------------------------------------------------

def cell_index(g: Grid):
    return np.arange(g.nx * g.ny).reshape(g.nx, g.ny)


def gradient_matrices(g: Grid):
    """(Gx, Gy) mapping cell vectors to interior-face gradients (walls zero)."""
    N = g.nx * g.ny
    ci = cell_index(g)

    nxf = (g.nx + 1) * g.ny
    xf = np.arange(nxf).reshape(g.nx + 1, g.ny)
    rows = np.repeat(xf[1:-1, :].ravel(), 2)
    cols = np.stack([ci[1:, :].ravel(), ci[:-1, :].ravel()], axis=1).ravel()
    vals = np.tile([1.0 / g.dx, -1.0 / g.dx], (g.nx - 1) * g.ny)
    Gx = sp.csr_matrix((vals, (rows, cols)), shape=(nxf, N))

    nyf = g.nx * (g.ny + 1)
    yf = np.arange(nyf).reshape(g.nx, g.ny + 1)
    rows = np.repeat(yf[:, 1:-1].ravel(), 2)
    cols = np.stack([ci[:, 1:].ravel(), ci[:, :-1].ravel()], axis=1).ravel()
    vals = np.tile([1.0 / g.dy, -1.0 / g.dy], g.nx * (g.ny - 1))
    Gy = sp.csr_matrix((vals, (rows, cols)), shape=(nyf, N))
    return Gx, Gy


def divergence_matrices(g: Grid):
    """(Dx, Dy) mapping face vectors to the per-cell flux balance."""
    N = g.nx * g.ny
    ci = cell_index(g)

    nxf = (g.nx + 1) * g.ny
    xf = np.arange(nxf).reshape(g.nx + 1, g.ny)
    rows = np.repeat(ci.ravel(), 2)
    cols = np.stack([xf[1:, :].ravel(), xf[:-1, :].ravel()], axis=1).ravel()
    vals = np.tile([1.0 / g.dx, -1.0 / g.dx], N)
    Dx = sp.csr_matrix((vals, (rows, cols)), shape=(N, nxf))

    nyf = g.nx * (g.ny + 1)
    yf = np.arange(nyf).reshape(g.nx, g.ny + 1)
    cols = np.stack([yf[:, 1:].ravel(), yf[:, :-1].ravel()], axis=1).ravel()
    vals = np.tile([1.0 / g.dy, -1.0 / g.dy], N)
    Dy = sp.csr_matrix((vals, (rows, cols)), shape=(N, nyf))
    return Dx, Dy


def diffusion_matrix(g: Grid, coeff_faces: FaceField):
    """div(coeff grad .) with zero-normal-gradient walls, as a sparse matrix."""
    Gx, Gy = gradient_matrices(g)
    Dx, Dy = divergence_matrices(g)
    return (Dx @ sp.diags(coeff_faces.fx.ravel()) @ Gx
            + Dy @ sp.diags(coeff_faces.fy.ravel()) @ Gy)


# ---------------------------------------------------------------------------
# momentum-space operators (interior-face degrees of freedom)
# ---------------------------------------------------------------------------

def n_velocity_dofs(g: Grid) -> tuple[int, int]:
    return (g.nx - 1) * g.ny, g.nx * (g.ny - 1)


def pack_velocity(g: Grid, u: FaceField) -> np.ndarray:
    return np.concatenate([u.fx[1:-1, :].ravel(), u.fy[:, 1:-1].ravel()])


def unpack_velocity(g: Grid, v: np.ndarray) -> FaceField:
    nux, nuy = n_velocity_dofs(g)
    out = FaceField.zeros(g)
    out.fx[1:-1, :] = v[:nux].reshape(g.nx - 1, g.ny)
    out.fy[:, 1:-1] = v[nux:nux + nuy].reshape(g.nx, g.ny - 1)
    return out


def _corner_average(g: Grid, s: CellField) -> np.ndarray:
    """Cell values averaged to the (nx+1, ny+1) nodes (mean of existing cells)."""
    acc = np.zeros((g.nx + 1, g.ny + 1))
    cnt = np.zeros((g.nx + 1, g.ny + 1))
    for di in (0, 1):
        for dj in (0, 1):
            acc[di:g.nx + di, dj:g.ny + dj] += s
            cnt[di:g.nx + di, dj:g.ny + dj] += 1.0
    return acc / cnt


def _strain_matrices(g: Grid):
    """exx, eyy at cells and the shear (dux/dy + duy/dx) at nodes, on the
    interior-face dof vector; tangential wall values use the no-slip ghost."""
    nux, nuy = n_velocity_dofs(g)
    ndof = nux + nuy
    N = g.nx * g.ny
    ci = cell_index(g)
    # dof ids on full face lattices, -1 where the face is a wall
    idx = -np.ones((g.nx + 1, g.ny), dtype=int)
    idx[1:-1, :] = np.arange(nux).reshape(g.nx - 1, g.ny)
    idy = -np.ones((g.nx, g.ny + 1), dtype=int)
    idy[:, 1:-1] = nux + np.arange(nuy).reshape(g.nx, g.ny - 1)

    def collect(rows, cols, vals, r, c, v):
        keep = c >= 0
        rows.append(r[keep])
        cols.append(c[keep])
        vals.append(v[keep])

    rows, cols, vals = [], [], []
    r = np.repeat(ci.ravel(), 2)
    c = np.stack([idx[1:, :].ravel(), idx[:-1, :].ravel()], axis=1).ravel()
    v = np.tile([1.0 / g.dx, -1.0 / g.dx], N)
    collect(rows, cols, vals, r, c, v)
    exx = sp.csr_matrix((np.concatenate(vals),
                         (np.concatenate(rows), np.concatenate(cols))),
                        shape=(N, ndof))

    rows, cols, vals = [], [], []
    c = np.stack([idy[:, 1:].ravel(), idy[:, :-1].ravel()], axis=1).ravel()
    v = np.tile([1.0 / g.dy, -1.0 / g.dy], N)
    collect(rows, cols, vals, r, c, v)
    eyy = sp.csr_matrix((np.concatenate(vals),
                         (np.concatenate(rows), np.concatenate(cols))),
                        shape=(N, ndof))

    # shear at the (nx+1)*(ny+1) nodes
    nodes = np.arange((g.nx + 1) * (g.ny + 1)).reshape(g.nx + 1, g.ny + 1)
    rows, cols, vals = [], [], []

    # dux/dy: interior nodes (j = 1..ny-1) difference, wall nodes ghost 2u/dy
    i_idx, j_idx = np.meshgrid(np.arange(g.nx + 1), np.arange(1, g.ny), indexing="ij")
    r = np.repeat(nodes[i_idx, j_idx].ravel(), 2)
    c = np.stack([idx[i_idx, j_idx].ravel(), idx[i_idx, j_idx - 1].ravel()],
                 axis=1).ravel()
    v = np.tile([1.0 / g.dy, -1.0 / g.dy], i_idx.size)
    collect(rows, cols, vals, r, c, v)
    i_idx = np.arange(g.nx + 1)
    collect(rows, cols, vals, nodes[i_idx, 0], idx[i_idx, 0],
            np.full(g.nx + 1, 2.0 / g.dy))
    collect(rows, cols, vals, nodes[i_idx, g.ny], idx[i_idx, g.ny - 1],
            np.full(g.nx + 1, -2.0 / g.dy))

    # duy/dx: interior nodes (i = 1..nx-1) difference, wall nodes ghost 2u/dx
    i_idx, j_idx = np.meshgrid(np.arange(1, g.nx), np.arange(g.ny + 1), indexing="ij")
    r = np.repeat(nodes[i_idx, j_idx].ravel(), 2)
    c = np.stack([idy[i_idx, j_idx].ravel(), idy[i_idx - 1, j_idx].ravel()],
                 axis=1).ravel()
    v = np.tile([1.0 / g.dx, -1.0 / g.dx], i_idx.size)
    collect(rows, cols, vals, r, c, v)
    j_idx = np.arange(g.ny + 1)
    collect(rows, cols, vals, nodes[0, j_idx], idy[0, j_idx],
            np.full(g.ny + 1, 2.0 / g.dx))
    collect(rows, cols, vals, nodes[g.nx, j_idx], idy[g.nx - 1, j_idx],
            np.full(g.ny + 1, -2.0 / g.dx))

    shear = sp.csr_matrix((np.concatenate(vals),
                           (np.concatenate(rows), np.concatenate(cols))),
                          shape=((g.nx + 1) * (g.ny + 1), ndof))
    return exx, eyy, shear


def _node_cell_counts(g: Grid) -> np.ndarray:
    cnt = np.zeros((g.nx + 1, g.ny + 1))
    for di in (0, 1):
        for dj in (0, 1):
            cnt[di:g.nx + di, dj:g.ny + dj] += 1.0
    return cnt


def viscous_matrix(g: Grid, eta: CellField, lam: CellField):
    """Operator for div(eta D(u)) + grad(lam div u) on interior-face dofs.

    Assembled as the (negated) gradient of the dissipation quadratic form
    Q(u) = int 2 eta (exx^2 + eyy^2) + eta_node shear^2 + lam (div u)^2,
    hence symmetric negative semidefinite by construction.  Node quadrature
    weights shrink to a half/quarter cell on walls/corners, which makes the
    first row off a wall coincide with the standard no-slip ghost stencil.
    """
    exx, eyy, shear = _strain_matrices(g)
    div = exx + eyy
    node_w = _node_cell_counts(g) / 4.0
    eta_v = (_corner_average(g, eta) * node_w).ravel()
    A = (2.0 * exx.T @ sp.diags(eta.ravel()) @ exx
         + 2.0 * eyy.T @ sp.diags(eta.ravel()) @ eyy
         + shear.T @ sp.diags(eta_v) @ shear
         + div.T @ sp.diags(lam.ravel()) @ div)
    return (-A).tocsr()


def viscous_operator(g: Grid, eta: CellField, lam: CellField, u: FaceField) -> FaceField:
    L = viscous_matrix(g, eta, lam)
    return unpack_velocity(g, L @ pack_velocity(g, u))


def viscous_heating_cells(g: Grid, eta: CellField, lam: CellField,
                          u: FaceField) -> CellField:
    """Pointwise-nonnegative heating whose integral is exactly -<Lu, u>.

    Node shear terms are split evenly among their adjacent cells so the
    cell total matches the dissipation form used by viscous_matrix.
    """
    v = pack_velocity(g, u)
    exx, eyy, shear = _strain_matrices(g)
    e1 = (exx @ v).reshape(g.nx, g.ny)
    e2 = (eyy @ v).reshape(g.nx, g.ny)
    dv = e1 + e2
    heat = 2.0 * eta * (e1**2 + e2**2) + lam * dv**2

    sh = (shear @ v).reshape(g.nx + 1, g.ny + 1)
    # node weight is (adjacent cells)/4 * dxdy, so every adjacent cell
    # receives exactly a quarter of the node's shear dissipation
    node_term = 0.25 * _corner_average(g, eta) * sh**2
    for di in (0, 1):
        for dj in (0, 1):
            heat += node_term[di:g.nx + di, dj:g.ny + dj]
    return heat


def _uy_at_xface(g: Grid, uy: np.ndarray) -> np.ndarray:
    """u_y interpolated to interior x-faces, shape (nx-1, ny)."""
    at_node = 0.5 * (uy[:-1, :] + uy[1:, :])          # (nx-1, ny+1)
    return 0.5 * (at_node[:, :-1] + at_node[:, 1:])


def _ux_at_yface(g: Grid, ux: np.ndarray) -> np.ndarray:
    """u_x interpolated to interior y-faces, shape (nx, ny-1)."""
    at_node = 0.5 * (ux[:, :-1] + ux[:, 1:])          # (nx+1, ny-1)
    return 0.5 * (at_node[:-1, :] + at_node[1:, :])


def convective_matrix(g: Grid, rho: CellField, u_star: FaceField, mode: str):
    """rho u*.grad(u) on interior-face dofs.

    mode="skew": div(w_hat u_hat) - u avg(div w) with w = avg(rho) u*, which
    pairs exactly with the mass update in the kinetic-energy ledger.
    mode="upwind": first-order one-sided differences of u*.grad u, scaled by
    the face-averaged density.
    """
    if mode == "skew":
        return _convective_matrix_skew(g, rho, u_star)
    if mode == "upwind":
        return _convective_matrix_upwind(g, rho, u_star)
    raise ValueError(f"unknown convection mode {mode!r}")


def _convective_matrix_skew(g: Grid, rho: CellField, u_star: FaceField):
    rho_f = face_average(g, rho)
    wx = rho_f.fx * u_star.fx
    wy = rho_f.fy * u_star.fy
    divw = div_face_to_cell(g, FaceField(wx, wy))

    nux, nuy = n_velocity_dofs(g)
    ndof = nux + nuy
    idx = -np.ones((g.nx + 1, g.ny), dtype=int)
    idx[1:-1, :] = np.arange(nux).reshape(g.nx - 1, g.ny)
    idy = -np.ones((g.nx, g.ny + 1), dtype=int)
    idy[:, 1:-1] = nux + np.arange(nuy).reshape(g.nx, g.ny - 1)

    rows, cols, vals = [], [], []

    def add(r, c, v):
        keep = (c >= 0) & (v != 0.0)
        rows.append(np.asarray(r)[keep])
        cols.append(np.asarray(c)[keep])
        vals.append(np.asarray(v)[keep])

    # ---- x-momentum rows -------------------------------------------------
    wxc = 0.5 * (wx[:-1, :] + wx[1:, :])              # w_hat_x at cells
    wyn = 0.5 * (wy[:-1, :] + wy[1:, :])              # w_hat_y at x-nodes (nx-1, ny+1)
    for ii in range(1, g.nx):
        r = idx[ii, :]
        # east/west fluxes through cell centers ii and ii-1
        for cell, sgn in ((ii, 1.0), (ii - 1, -1.0)):
            coef = sgn * wxc[cell, :] * 0.5 / g.dx
            add(r, idx[cell, :], coef)
            add(r, idx[cell + 1, :], coef)
        # north/south fluxes through nodes (ii, j+1) and (ii, j)
        coef_n = wyn[ii - 1, 1:] * 0.5 / g.dy          # node above, (ny,)
        j = np.arange(g.ny)
        add(r, idx[ii, j], coef_n)                     # u at this face
        add(r[:-1], idx[ii, j[:-1] + 1], coef_n[:-1])  # u above (wall node flux is 0)
        coef_s = -wyn[ii - 1, :-1] * 0.5 / g.dy
        add(r, idx[ii, j], coef_s)
        add(r[1:], idx[ii, j[1:] - 1], coef_s[1:])
        # -u avg(div w)
        add(r, idx[ii, :], -0.5 * (divw[ii - 1, :] + divw[ii, :]))

    # ---- y-momentum rows -------------------------------------------------
    wyc = 0.5 * (wy[:, :-1] + wy[:, 1:])              # w_hat_y at cells
    wxn = 0.5 * (wx[:, :-1] + wx[:, 1:])              # w_hat_x at y-nodes (nx+1, ny-1)
    for jj in range(1, g.ny):
        r = idy[:, jj]
        for cell, sgn in ((jj, 1.0), (jj - 1, -1.0)):
            coef = sgn * wyc[:, cell] * 0.5 / g.dy
            add(r, idy[:, cell], coef)
            add(r, idy[:, cell + 1], coef)
        coef_e = wxn[1:, jj - 1] * 0.5 / g.dx
        i = np.arange(g.nx)
        add(r, idy[i, jj], coef_e)
        add(r[:-1], idy[i[:-1] + 1, jj], coef_e[:-1])
        coef_w = -wxn[:-1, jj - 1] * 0.5 / g.dx
        add(r, idy[i, jj], coef_w)
        add(r[1:], idy[i[1:] - 1, jj], coef_w[1:])
        add(r, idy[:, jj], -0.5 * (divw[:, jj - 1] + divw[:, jj]))

    return sp.csr_matrix((np.concatenate(vals),
                          (np.concatenate(rows), np.concatenate(cols))),
                         shape=(ndof, ndof))


def _convective_matrix_upwind(g: Grid, rho: CellField, u_star: FaceField):
    rho_f = face_average(g, rho)
    nux, nuy = n_velocity_dofs(g)
    ndof = nux + nuy
    idx = -np.ones((g.nx + 1, g.ny), dtype=int)
    idx[1:-1, :] = np.arange(nux).reshape(g.nx - 1, g.ny)
    idy = -np.ones((g.nx, g.ny + 1), dtype=int)
    idy[:, 1:-1] = nux + np.arange(nuy).reshape(g.nx, g.ny - 1)

    rows, cols, vals = [], [], []

    def add(r, c, v):
        r, c, v = map(np.ravel, np.broadcast_arrays(r, c, v))
        keep = (c >= 0) & (v != 0.0)
        rows.append(r[keep])
        cols.append(c[keep])
        vals.append(v[keep])

    # ---- x-momentum ------------------------------------------------------
    ax = u_star.fx[1:-1, :]                            # advecting u*_x, (nx-1, ny)
    ay = _uy_at_xface(g, u_star.fy)                    # u*_y there
    rx = rho_f.fx[1:-1, :]
    r = idx[1:-1, :]
    # d/dx: neighbors are faces i-1, i+1 on the same lattice (walls are 0)
    pos = ax > 0
    cslf = np.where(pos, 1.0, -1.0) * rx * ax / g.dx
    add(r, r, cslf)
    left = np.full_like(r, -1)
    left[1:, :] = idx[1:-2, :]
    right = np.full_like(r, -1)
    right[:-1, :] = idx[2:-1, :]
    add(r, np.where(pos, left, right), -np.where(pos, rx * ax, -rx * ax) / g.dx)
    # d/dy: ghost reflection at walls doubles the diagonal term
    pos = ay > 0
    below = np.full_like(r, -1)
    below[:, 1:] = idx[1:-1, :-1]
    above = np.full_like(r, -1)
    above[:, :-1] = idx[1:-1, 1:]
    nb = np.where(pos, below, above)
    diag = np.where(pos, 1.0, -1.0) * rx * ay / g.dy
    ghost = nb < 0                                     # wall: u_nb = -u_center
    add(r, r, diag * np.where(ghost, 2.0, 1.0))
    add(r, nb, -np.where(pos, rx * ay, -rx * ay) / g.dy)

    # ---- y-momentum ------------------------------------------------------
    ay = u_star.fy[:, 1:-1]
    ax = _ux_at_yface(g, u_star.fx)
    ry = rho_f.fy[:, 1:-1]
    r = idy[:, 1:-1]
    pos = ay > 0
    add(r, r, np.where(pos, 1.0, -1.0) * ry * ay / g.dy)
    below = np.full_like(r, -1)
    below[:, 1:] = idy[:, 1:-2]
    above = np.full_like(r, -1)
    above[:, :-1] = idy[:, 2:-1]
    add(r, np.where(pos, below, above), -np.where(pos, ry * ay, -ry * ay) / g.dy)
    pos = ax > 0
    left = np.full_like(r, -1)
    left[1:, :] = idy[:-1, 1:-1]
    right = np.full_like(r, -1)
    right[:-1, :] = idy[1:, 1:-1]
    nb = np.where(pos, left, right)
    diag = np.where(pos, 1.0, -1.0) * ry * ax / g.dx
    ghost = nb < 0
    add(r, r, diag * np.where(ghost, 2.0, 1.0))
    add(r, nb, -np.where(pos, ry * ax, -ry * ax) / g.dx)

    return sp.csr_matrix((np.concatenate(vals),
                          (np.concatenate(rows), np.concatenate(cols))),
                         shape=(ndof, ndof))


def convective_operator(g: Grid, rho: CellField, u_star: FaceField,
                        u: FaceField, mode: str) -> FaceField:
    C = convective_matrix(g, rho, u_star, mode)
    return unpack_velocity(g, C @ pack_velocity(g, u))

"""Connection, holonomy, and operator machinery over the path space.

The line bundle is trivialized over the working chart; sections are complex
scalar functions of the chart coordinates and the Hermitian metric is the
plain modulus.  The base connection is d - (i/hbar) theta; its pullback
through the start-point evaluation, corrected by the potential one-form from
`transgression`, has curvature (1/hbar) times the transgressed two-form.
Holonomy over loops of paths comes in two independent evaluations: loop line
integrals of the local potential, and fluxes through spanning surfaces.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._kernels import cumulative_simpson, simpson
from .errors import (
    BoundaryMismatchError,
    ChartDomainError,
    DimensionError,
    NonCompactDomainError,
)
from .geometry import FD_STEP_SCALE, PointVector, pairing_batch
from .paths import (
    DiscretePath,
    PathTangent,
    _derivative_closed,
    _derivative_open,
    constant_variation,
    eval_path_observable,
    hamiltonian_fields_along,
    hamiltonian_lift,
    omega_tilde,
)
from .transgression import lambda_eval

BOUNDARY_TOL = 1e-8


@dataclass(frozen=True)
class PrequantumConfig:
    """Planck scale plus the working model (its chart must carry a potential)."""

    hbar: float
    model: object

    def __post_init__(self):
        if not self.hbar > 0:
            raise DimensionError(f"hbar must be positive, got {self.hbar}")


@dataclass(frozen=True)
class Section:
    """Complex scalar section in the working trivialization."""

    name: str
    eval_fn: Callable[[str, np.ndarray], np.ndarray]
    grad_fn: Optional[Callable[[str, np.ndarray], np.ndarray]] = None

    def values(self, chart_id, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.asarray(self.eval_fn(chart_id, pts), dtype=complex)

    def value(self, chart_id, point):
        return complex(self.values(chart_id, point)[0])

    def gradients(self, chart_id, points, fd_step=None):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.grad_fn is not None and fd_step is None:
            return np.asarray(self.grad_fn(chart_id, pts), dtype=complex)
        step = fd_step or FD_STEP_SCALE
        k, dim = pts.shape
        grad = np.empty((k, dim), dtype=complex)
        for i in range(dim):
            h = step * (1.0 + np.abs(pts[:, i]))
            plus = pts.copy()
            minus = pts.copy()
            plus[:, i] += h
            minus[:, i] -= h
            grad[:, i] = (self.values(chart_id, plus) - self.values(chart_id, minus)) / (2.0 * h)
        return grad


def constant_section(c, name=None):
    c = complex(c)

    def eval_fn(chart, pts):
        return np.full(pts.shape[0], c, dtype=complex)

    def grad_fn(chart, pts):
        return np.zeros(pts.shape, dtype=complex)

    return Section(name or f"const({c})", eval_fn, grad_fn)


def poly2_section(coeffs, name=None):
    """Complex polynomial section in two chart coordinates."""
    items = sorted((tuple(k), complex(v)) for k, v in coeffs.items())

    def eval_fn(chart, pts):
        u, v = pts[:, 0], pts[:, 1]
        out = np.zeros(pts.shape[0], dtype=complex)
        for (i, j), c in items:
            out += c * u**i * v**j
        return out

    def grad_fn(chart, pts):
        u, v = pts[:, 0], pts[:, 1]
        g = np.zeros(pts.shape, dtype=complex)
        for (i, j), c in items:
            if i > 0:
                g[:, 0] += c * i * u ** (i - 1) * v**j
            if j > 0:
                g[:, 1] += c * j * u**i * v ** (j - 1)
        return g

    return Section(name or "poly_section", eval_fn, grad_fn)


# ---------------------------------------------------------------------------
# integrality over closed surfaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClosedSurfaceGrid:
    """Product quadrature grid covering a closed surface of the model.

    Uses the model's closed-surface coordinate box (full torus box, or the
    full polar range of the sphere where the degenerate poles carry vanishing
    area weight).
    """

    model: object
    nu: int = 128
    nv: int = 128

    def __post_init__(self):
        if self.model.closed_surface_box is None:
            raise NonCompactDomainError(
                f"model {self.model.name!r} has no closed surface to integrate over"
            )
        if self.nu % 2 or self.nv % 2:
            raise DimensionError("closed-surface grid resolutions must be even")

    def total_flux(self):
        (u0, u1), (v0, v1) = self.model.closed_surface_box
        u = np.linspace(u0, u1, self.nu + 1)
        v = np.linspace(v0, v1, self.nv + 1)
        uu, vv = np.meshgrid(u, v, indexing="ij")
        pts = np.stack([uu.ravel(), vv.ravel()], axis=1)
        comp = self.model.omega(self.model.default_chart(), pts)[:, 0, 1].reshape(uu.shape)
        du = (u1 - u0) / self.nu
        rows = simpson(comp, (v1 - v0) / self.nv)
        return float(simpson(rows, du))


def integrality_check(cfg, surface_grid):
    """Nearest integer level of the total flux in units of 2*pi*hbar."""
    flux = surface_grid.total_flux()
    ratio = flux / (2.0 * np.pi * cfg.hbar)
    n = int(round(ratio))
    return n, abs(ratio - n)


# ---------------------------------------------------------------------------
# covariant derivatives
# ---------------------------------------------------------------------------


def covariant_derivative(cfg, section, p, u, fd_step=None):
    """(d - (i/hbar) theta) applied to a section, at p along the vector u."""
    if not isinstance(u, PointVector):
        raise DimensionError("u must be a PointVector")
    p = np.asarray(p, dtype=float)
    cfg.model.require_inside(u.chart_id, p)
    ds = section.gradients(u.chart_id, p[None, :], fd_step=fd_step)[0]
    theta = cfg.model.theta(u.chart_id, p[None, :])[0]
    sval = section.value(u.chart_id, p)
    return complex(
        np.sum(ds * u.components)
        - 1j / cfg.hbar * float(np.sum(theta * u.components)) * sval
    )


def pullback_covariant_derivative(cfg, section, path, tangent, fd_step=None):
    """Pulled-back connection on start-point pullback sections.

    Start-point covariant term along the initial vector, plus the potential
    one-form term evaluated on the whole field.
    """
    p0 = path.points[0]
    u0 = PointVector(path.chart_id, p0, tangent.vectors[0])
    base = covariant_derivative(cfg, section, p0, u0, fd_step=fd_step)
    lam = lambda_eval(cfg.model, path, tangent)
    return base - 1j / cfg.hbar * lam * section.value(path.chart_id, p0)


def _connection_on_path_function(cfg, fn, path, v_const, step):
    """Connection along a constant variation, applied to a function of the path."""
    v = np.asarray(v_const, dtype=float)
    deriv = (fn(path.displaced(v, step)) - fn(path.displaced(v, -step))) / (2.0 * step)
    theta0 = float(np.sum(cfg.model.theta(path.chart_id, path.points[0][None, :])[0] * v))
    lam = lambda_eval(cfg.model, path, constant_variation(path, v))
    return deriv - 1j / cfg.hbar * (theta0 + lam) * fn(path)


def curvature_residual(cfg, path, v_const, w_const, step=1e-4):
    """Commutator-of-connections curvature defect on constant variations.

    Uses the unit test section, for which the connection along a variation is
    a closed-form function of the path; the bracket correction vanishes for
    constant variations.
    """
    model = cfg.model

    def nabla_unit(direction):
        d = np.asarray(direction, dtype=float)

        def fn(p):
            theta0 = float(np.sum(model.theta(p.chart_id, p.points[0][None, :])[0] * d))
            lam = lambda_eval(model, p, constant_variation(p, d))
            return -1j / cfg.hbar * (theta0 + lam)

        return fn

    u_w = nabla_unit(w_const)
    u_v = nabla_unit(v_const)
    comm = _connection_on_path_function(
        cfg, u_w, path, v_const, step
    ) - _connection_on_path_function(cfg, u_v, path, w_const, step)
    target = omega_tilde(
        model, path, constant_variation(path, v_const), constant_variation(path, w_const)
    )
    return abs(1j * cfg.hbar * comm - target)


# ---------------------------------------------------------------------------
# loops of paths and spanning surfaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LoopOfPathsGrid:
    """(s, t) samples of a closed family of paths; row S repeats row 0 exactly."""

    model: object
    chart_id: str
    grid: object
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        s_count = pts.shape[0] - 1
        if s_count < 8 or s_count % 2:
            raise DimensionError(
                f"loop grids need an even transversal interval count >= 8, got {s_count}"
            )
        if pts.shape[1] != self.grid.n + 1 or pts.shape[2] != self.model.dim:
            raise DimensionError(f"loop grid has shape {pts.shape}, inconsistent with the path grid")
        if not np.array_equal(pts[0], pts[-1]):
            raise DimensionError("loop grid must close exactly in the transversal direction")

    @property
    def s_count(self):
        return self.points.shape[0] - 1

    def transversal_derivatives(self):
        """d/ds of the grid: sixth-order periodic, winding-aware in angles."""
        rows = self.points.reshape(self.points.shape[0], -1, self.model.dim)
        d = _derivative_closed(rows, 1.0 / self.s_count, self.model.periods)
        return d.reshape(self.points.shape)

    def path_at(self, s_index):
        return DiscretePath(self.model, self.chart_id, self.grid, self.points[s_index])


def loop_from_function(model, grid, s_count, fn, chart_id=None):
    """Sample a closed family (s, t) -> point; the seam row is copied for exact closure."""
    chart_id = chart_id or model.default_chart()
    s = np.arange(s_count + 1) / s_count
    pts = np.empty((s_count + 1, grid.n + 1, model.dim))
    t = grid.nodes
    for i, si in enumerate(s[:-1]):
        for j, tj in enumerate(t):
            pts[i, j] = fn(si, tj)
    pts[-1] = pts[0]
    return LoopOfPathsGrid(model, chart_id, grid, pts)


def sweep_circle_loop(model, grid, s_count=128, center=(0.0, 0.0), radius=1.0, radius_fn=None):
    """Planar circles of (possibly t-dependent) radius, traversed in s."""
    c = np.asarray(center, dtype=float)
    rfn = radius_fn if radius_fn is not None else (lambda t: radius)
    a, b = grid.interval

    def fn(s, t):
        ang = 2.0 * np.pi * s
        return c + rfn((t - a) / (b - a)) * np.array([np.cos(ang), np.sin(ang)])

    return loop_from_function(model, grid, s_count, fn)


def latitude_sweep_loop(model, grid, s_count=128, phi=1.0, phi_fn=None):
    """Latitude circles on the sphere chart (the seam crossing is fine here:
    only surface holonomy is taken over these)."""
    pfn = phi_fn if phi_fn is not None else (lambda t: phi)
    a, b = grid.interval

    def fn(s, t):
        return np.array([pfn((t - a) / (b - a)), 2.0 * np.pi * s])

    return loop_from_function(model, grid, s_count, fn)


def _loop_potential_integrals(cfg, loop):
    """Line integral of the local potential around every longitudinal loop."""
    model = cfg.model
    box = model.chart(loop.chart_id)
    flat = loop.points.reshape(-1, model.dim)
    if not np.all(box.contains(flat)):
        raise ChartDomainError(
            "loop grid leaves the chart interior; the chart holonomy formula needs "
            "a single potential domain"
        )
    theta = model.theta(loop.chart_id, flat).reshape(loop.points.shape)
    dgamma = loop.transversal_derivatives()
    integrand = np.sum(theta * dgamma, axis=2)
    # periodic trapezoid in s: drop the duplicated seam row
    return integrand[:-1].mean(axis=0)


def holonomy_chart(cfg, loop):
    """Holonomy from longitudinal potential line integrals (single-chart loops)."""
    loop_ints = _loop_potential_integrals(cfg, loop)
    phase = float(simpson(loop_ints, loop.grid.dt)) / cfg.hbar
    return complex(np.exp(1j * phase))


@dataclass(frozen=True)
class SurfaceOnPathsGrid:
    """(sigma, eps, t) samples; the eps=0 edge traces the loop it spans.

    The sigma direction is closed (seam row repeated); the eps=1 edge is the
    far side of the spanning family (a cap apex or a degenerate point).
    """

    model: object
    chart_id: str
    grid: object
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        ns, ne = pts.shape[0] - 1, pts.shape[1] - 1
        if ns < 8 or ns % 2 or ne < 4 or ne % 2:
            raise DimensionError(f"surface grid resolutions must be even (got {ns} x {ne})")
        if pts.shape[2] != self.grid.n + 1 or pts.shape[3] != self.model.dim:
            raise DimensionError("surface grid inconsistent with its path grid")
        if not np.array_equal(pts[0], pts[-1]):
            raise DimensionError("surface grid must close exactly in the sigma direction")

    @property
    def sigma_count(self):
        return self.points.shape[0] - 1

    @property
    def eps_count(self):
        return self.points.shape[1] - 1

    def require_spans(self, loop):
        if self.points.shape[0] != loop.points.shape[0] or self.points.shape[2] != loop.points.shape[1]:
            raise BoundaryMismatchError("surface and loop grids have different resolutions")
        gap = float(np.max(np.abs(self.points[:, 0, :, :] - loop.points)))
        if gap > BOUNDARY_TOL:
            raise BoundaryMismatchError(
                f"surface boundary misses the loop by {gap:.3e} (tolerance {BOUNDARY_TOL})"
            )

    def fluxes(self):
        """Flux of the base two-form through every t-slice."""
        ns, ne = self.sigma_count, self.eps_count
        rows = self.points.reshape(ns + 1, -1, self.model.dim)
        d_sigma = _derivative_closed(rows, 1.0 / ns, self.model.periods).reshape(
            self.points.shape
        )
        moved = np.moveaxis(self.points, 1, 0).reshape(ne + 1, -1)
        d_eps = np.moveaxis(
            _derivative_open(moved, 1.0 / ne).reshape(
                (ne + 1,) + self.points.shape[:1] + self.points.shape[2:]
            ),
            0,
            1,
        )
        pts = self.points.reshape(-1, self.model.dim)
        w = self.model.omega(self.chart_id, pts)
        integrand = pairing_batch(
            w, d_sigma.reshape(-1, self.model.dim), d_eps.reshape(-1, self.model.dim)
        ).reshape(self.points.shape[:3])
        per_sigma = simpson(np.moveaxis(integrand, 1, 2), 1.0 / ne)
        return simpson(per_sigma.T, 1.0 / ns)


def surface_from_function(model, grid, sigma_count, eps_count, fn, chart_id=None):
    chart_id = chart_id or model.default_chart()
    pts = np.empty((sigma_count + 1, eps_count + 1, grid.n + 1, model.dim))
    t = grid.nodes
    for i in range(sigma_count):
        si = i / sigma_count
        for j in range(eps_count + 1):
            ej = j / eps_count
            for k, tk in enumerate(t):
                pts[i, j, k] = fn(si, ej, tk)
    pts[-1] = pts[0]
    return SurfaceOnPathsGrid(model, chart_id, grid, pts)


def disk_surface(model, loop, eps_count=32):
    """Radial fill of a planar circle sweep; boundary rows are shared with the loop."""
    ns = loop.s_count
    # per-slice centers from the periodic mean (seam row excluded)
    centers = loop.points[:-1].mean(axis=0)
    eps = np.arange(eps_count + 1) / eps_count
    pts = np.empty((ns + 1, eps_count + 1, loop.grid.n + 1, model.dim))
    for j, ej in enumerate(eps):
        pts[:, j] = centers + (1.0 - ej) * (loop.points - centers)
    pts[:, 0] = loop.points
    pts[-1] = pts[0]
    surf = SurfaceOnPathsGrid(model, loop.chart_id, loop.grid, pts)
    surf.require_spans(loop)
    return surf


def cap_surface(model, loop, eps_count=32, pole="north"):
    """Polar cap over a latitude sweep on the sphere chart."""
    ns = loop.s_count
    eps = np.arange(eps_count + 1) / eps_count
    phi = loop.points[:, :, 0]
    psi = loop.points[:, :, 1]
    pts = np.empty((ns + 1, eps_count + 1, loop.grid.n + 1, model.dim))
    for j, ej in enumerate(eps):
        if pole == "north":
            pts[:, j, :, 0] = phi * (1.0 - ej)
        else:
            pts[:, j, :, 0] = phi + ej * (np.pi - phi)
        pts[:, j, :, 1] = psi
    pts[:, 0, :, 0] = phi
    pts[-1] = pts[0]
    surf = SurfaceOnPathsGrid(model, loop.chart_id, loop.grid, pts)
    surf.require_spans(loop)
    return surf


def holonomy_surface(cfg, surface, loop=None):
    """Holonomy from slice fluxes through a spanning surface."""
    if loop is not None:
        surface.require_spans(loop)
    fluxes = surface.fluxes()
    phase = float(simpson(fluxes, surface.grid.dt)) / cfg.hbar
    return complex(np.exp(1j * phase))


def lambda_line_integral(cfg, loop):
    """Line integral of the potential one-form along a loop of paths (Simpson in s)."""
    dgamma = loop.transversal_derivatives()
    vals = np.empty(loop.points.shape[0])
    for i in range(loop.points.shape[0] - 1):
        path = loop.path_at(i)
        vals[i] = lambda_eval(cfg.model, path, PathTangent(path, dgamma[i]))
    vals[-1] = vals[0]
    return float(simpson(vals, 1.0 / loop.s_count))


def lambda_flux_form(cfg, loop):
    """Same quantity by the truncated-flux formula (periodic trapezoid in s).

    Serves as the independent cross-check for `lambda_line_integral`: the
    running flux through the partial sweep is integrated over the truncation
    parameter.
    """
    model = cfg.model
    pts = loop.points
    dgamma_s = loop.transversal_derivatives()
    flat_t = np.moveaxis(pts, 1, 0).reshape(pts.shape[1], -1)
    dgamma_t = np.moveaxis(
        _derivative_open(flat_t, loop.grid.dt).reshape(
            (pts.shape[1], pts.shape[0], pts.shape[2])
        ),
        0,
        1,
    )
    w = model.omega(loop.chart_id, pts.reshape(-1, model.dim))
    q = pairing_batch(
        w, dgamma_t.reshape(-1, model.dim), dgamma_s.reshape(-1, model.dim)
    ).reshape(pts.shape[:2])
    prefix = cumulative_simpson(q, loop.grid.dt)
    flux_per_t = prefix[:-1].mean(axis=0)
    return float(simpson(flux_per_t, loop.grid.dt))


# ---------------------------------------------------------------------------
# prequantum operators
# ---------------------------------------------------------------------------


def apply_operator(cfg, phi, section, path):
    """(-i hbar nabla_lift + phi) applied to a start-point pullback section."""
    lift = hamiltonian_lift(cfg.model, phi, path)
    p0 = path.points[0]
    u0 = PointVector(path.chart_id, p0, lift.vectors[0])
    nabla0 = covariant_derivative(cfg, section, p0, u0)
    lam = lambda_eval(cfg.model, path, lift)
    s0 = section.value(path.chart_id, p0)
    return -1j * cfg.hbar * nabla0 - lam * s0 + eval_path_observable(phi, path) * s0


def apply_operator_product(cfg, f, g, section, path):
    """Explicit five-term action for a product of two lifted observables."""
    model = cfg.model
    p0 = path.points[0]
    xf = hamiltonian_fields_along(model, f, path.chart_id, path.points)
    xg = hamiltonian_fields_along(model, g, path.chart_id, path.points)
    f_tilde = float(simpson(f.values(path.chart_id, path.points), path.grid.dt))
    g_tilde = float(simpson(g.values(path.chart_id, path.points), path.grid.dt))
    nabla_f = covariant_derivative(cfg, section, p0, PointVector(path.chart_id, p0, xf[0]))
    nabla_g = covariant_derivative(cfg, section, p0, PointVector(path.chart_id, p0, xg[0]))
    lam_f = lambda_eval(model, path, PathTangent(path, xf))
    lam_g = lambda_eval(model, path, PathTangent(path, xg))
    s0 = section.value(path.chart_id, p0)
    return (
        -1j * cfg.hbar * g_tilde * nabla_f
        - 1j * cfg.hbar * f_tilde * nabla_g
        - g_tilde * lam_f * s0
        - f_tilde * lam_g * s0
        + f_tilde * g_tilde * s0
    )


def operator_on_path_section(cfg, phi, section_fn, path, step=1e-4, richardson=True):
    """Apply the operator of phi to a general section given as a path function.

    The directional derivative along the lift is a central difference with
    one Richardson extrapolation; the connection terms reuse the start-point
    potential and the potential one-form.
    """
    model = cfg.model
    lift = hamiltonian_lift(model, phi, path)
    vec = lift.vectors

    def deriv(h):
        return (section_fn(path.displaced(vec, h)) - section_fn(path.displaced(vec, -h))) / (
            2.0 * h
        )

    d = deriv(step)
    if richardson:
        d = (4.0 * deriv(step / 2.0) - d) / 3.0
    theta0 = float(np.sum(model.theta(path.chart_id, path.points[0][None, :])[0] * vec[0]))
    lam = lambda_eval(model, path, lift)
    uval = section_fn(path)
    nabla = d - 1j / cfg.hbar * (theta0 + lam) * uval
    return -1j * cfg.hbar * nabla + eval_path_observable(phi, path) * uval


def commutator_residual(cfg, phi1, phi2, section, path, step=1e-4):
    """Defect of the operator commutation law against the path-space bracket."""
    from .paths import path_observable_bracket

    def op1(p):
        return apply_operator(cfg, phi1, section, p)

    def op2(p):
        return apply_operator(cfg, phi2, section, p)

    commutator = operator_on_path_section(
        cfg, phi1, op2, path, step=step
    ) - operator_on_path_section(cfg, phi2, op1, path, step=step)
    bracket = path_observable_bracket(cfg.model, phi1, phi2, chart_id=path.chart_id)
    target = apply_operator(cfg, bracket, section, path)
    return abs(commutator + 1j * cfg.hbar * target)


# ---------------------------------------------------------------------------
# induced inner product
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChartQuadratureGrid:
    """Product Simpson grid over a coordinate box of the model chart."""

    nu: int = 128
    nv: int = 128
    box: Optional[tuple] = None

    def __post_init__(self):
        if self.nu % 2 or self.nv % 2:
            raise DimensionError("quadrature resolutions must be even")


def inner_product(cfg, s1, s2, mgrid=None):
    """Hermitian pairing of two sections against the Liouville area of the chart."""
    model = cfg.model
    if model.dim != 2:
        raise DimensionError("inner product quadrature is implemented for 2d models")
    mgrid = mgrid or ChartQuadratureGrid()
    if mgrid.box is not None:
        (u0, u1), (v0, v1) = mgrid.box
    else:
        chart = model.chart(model.default_chart())
        if not (np.all(np.isfinite(chart.lo)) and np.all(np.isfinite(chart.hi))):
            raise NonCompactDomainError(
                f"model {model.name!r} is noncompact; pass an explicit bounding box"
            )
        (u0, v0), (u1, v1) = chart.lo, chart.hi
    u = np.linspace(u0, u1, mgrid.nu + 1)
    v = np.linspace(v0, v1, mgrid.nv + 1)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    pts = np.stack([uu.ravel(), vv.ravel()], axis=1)
    chart_id = model.default_chart()
    area = model.omega(chart_id, pts)[:, 0, 1].reshape(uu.shape)
    vals = (s1.values(chart_id, pts) * np.conj(s2.values(chart_id, pts))).reshape(uu.shape)
    rows = simpson((vals * area).real, (v1 - v0) / mgrid.nv) + 1j * simpson(
        (vals * area).imag, (v1 - v0) / mgrid.nv
    )
    return complex(
        simpson(rows.real, (u1 - u0) / mgrid.nu) + 1j * simpson(rows.imag, (u1 - u0) / mgrid.nu)
    )

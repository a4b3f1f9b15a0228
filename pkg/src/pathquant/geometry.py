"""Chart-based symplectic models, observables, and pointwise brackets.

Conventions.  A model is described in a single coordinate chart (an open
box); the symplectic pairing of two coordinate vectors is w(u, v) = u^T W v
where W is the antisymmetric component matrix returned by the model.  The
Hamiltonian field of f solves the contraction identity w(X_f, .) = -df,
which in components reads W X_f = df.  Brackets follow {f, g} = w(X_f, X_g),
so {x, y} = 1 on the plane with w = dx^dy.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._kernels import solve_small_batch
from .errors import ChartDomainError, DegenerateFormError, DimensionError

PIVOT_TOL = 1e-12
FD_STEP_SCALE = 1e-5


@dataclass(frozen=True)
class ChartBox:
    """Open coordinate box with an interior safety margin."""

    chart_id: str
    lo: np.ndarray
    hi: np.ndarray
    margin_frac: float = 1e-3

    def margins(self):
        width = self.hi - self.lo
        return np.where(np.isfinite(width), width * self.margin_frac, 0.0)

    def contains(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        m = self.margins()
        ok_lo = pts >= self.lo + m
        ok_hi = pts <= self.hi - m
        return np.all(ok_lo & ok_hi, axis=1)


@dataclass(frozen=True)
class SymplecticModel:
    """Even-dimensional model with chart-wise symplectic components.

    omega_fn(chart, pts) returns the (k, dim, dim) antisymmetric component
    matrices at a batch of points; theta_fn, when present, returns the
    (k, dim) components of a local potential with d(theta) = omega.  The
    component maps are total functions of the coordinates; domain checking
    is done by the operations, which lets closed-surface quadrature reach
    coordinate degeneracies (poles, seams) where the integrand vanishes.
    """

    name: str
    dim: int
    charts: dict
    omega_fn: Callable[[str, np.ndarray], np.ndarray]
    theta_fn: Optional[Callable[[str, np.ndarray], np.ndarray]] = None
    compact: bool = False
    closed_surface_box: Optional[tuple] = None
    periods: Optional[tuple] = None  # per-coordinate period, 0 = aperiodic
    params: dict = field(default_factory=dict)

    def chart(self, chart_id):
        try:
            return self.charts[chart_id]
        except KeyError:
            raise ChartDomainError(f"model {self.name!r} has no chart {chart_id!r}") from None

    def default_chart(self):
        return next(iter(self.charts))

    def require_inside(self, chart_id, points):
        box = self.chart(chart_id)
        inside = box.contains(points)
        if not np.all(inside):
            bad = np.atleast_2d(points)[~inside][0]
            raise ChartDomainError(
                f"point {np.asarray(bad)} outside interior of chart {chart_id!r} "
                f"of model {self.name!r}"
            )

    def omega(self, chart_id, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dim:
            raise DimensionError(f"points have dimension {pts.shape[1]}, model has {self.dim}")
        return self.omega_fn(chart_id, pts)

    def theta(self, chart_id, points):
        if self.theta_fn is None:
            raise ChartDomainError(f"model {self.name!r} carries no local potential")
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return self.theta_fn(chart_id, pts)

    @property
    def has_theta(self):
        return self.theta_fn is not None


@dataclass(frozen=True)
class Observable:
    """Scalar function of chart coordinates, with optional analytic gradient."""

    name: str
    eval_fn: Callable[[str, np.ndarray], np.ndarray]
    grad_fn: Optional[Callable[[str, np.ndarray], np.ndarray]] = None

    def values(self, chart_id, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.asarray(self.eval_fn(chart_id, pts), dtype=float)

    def value(self, chart_id, point):
        return float(self.values(chart_id, point)[0])

    def gradients(self, chart_id, points, fd_step=None):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.grad_fn is not None and fd_step is None:
            return np.asarray(self.grad_fn(chart_id, pts), dtype=float)
        return fd_gradient(self, chart_id, pts, step_scale=fd_step or FD_STEP_SCALE)


@dataclass(frozen=True)
class PointVector:
    """Tangent vector attached to a chart point."""

    chart_id: str
    base_point: np.ndarray
    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base_point", np.asarray(self.base_point, dtype=float))
        object.__setattr__(self, "components", np.asarray(self.components, dtype=float))
        if self.base_point.shape != self.components.shape:
            raise DimensionError(
                f"base point has shape {self.base_point.shape}, "
                f"components have shape {self.components.shape}"
            )


def fd_gradient(obs, chart_id, points, step_scale=FD_STEP_SCALE):
    """Central-difference gradient with per-coordinate step h_i = s*(1+|p_i|)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    k, dim = pts.shape
    grad = np.empty((k, dim))
    for i in range(dim):
        h = step_scale * (1.0 + np.abs(pts[:, i]))
        plus = pts.copy()
        minus = pts.copy()
        plus[:, i] += h
        minus[:, i] -= h
        grad[:, i] = (obs.values(chart_id, plus) - obs.values(chart_id, minus)) / (2.0 * h)
    return grad


# ---------------------------------------------------------------------------
# built-in models
# ---------------------------------------------------------------------------


def _constant_omega(c, dim=2):
    w = np.zeros((dim, dim))
    w[0, 1] = c
    w[1, 0] = -c
    return w


def make_model(name, **params):
    """Built-in models: "r2", "t2" (scale c), "s2" (radius r, delta).

    r2: plane, w = dx^dy, theta = x dy, one unbounded chart.
    t2: flat torus as the periodic box [0, 2pi)^2, w = c dphi1^dphi2.
    s2: round sphere in spherical coordinates (phi, psi), w = r^2 sin(phi)
        dphi^dpsi, theta = -r^2 cos(phi) dpsi, chart (delta, pi-delta) x (0, 2pi).
    """
    name = name.lower()
    if name == "r2":
        box = ChartBox("xy", np.array([-np.inf, -np.inf]), np.array([np.inf, np.inf]))
        w = _constant_omega(1.0)

        def omega_fn(chart, pts):
            return np.broadcast_to(w, (pts.shape[0], 2, 2))

        def theta_fn(chart, pts):
            th = np.zeros_like(pts)
            th[:, 1] = pts[:, 0]
            return th

        return SymplecticModel(
            name="r2", dim=2, charts={"xy": box}, omega_fn=omega_fn, theta_fn=theta_fn,
            compact=False, closed_surface_box=None, params={},
        )

    if name == "t2":
        c = float(params.get("scale", 1.0))
        box = ChartBox("angles", np.array([0.0, 0.0]), np.array([2 * np.pi, 2 * np.pi]))
        w = _constant_omega(c)

        def omega_fn(chart, pts):
            return np.broadcast_to(w, (pts.shape[0], 2, 2))

        def theta_fn(chart, pts):
            th = np.zeros_like(pts)
            th[:, 1] = c * pts[:, 0]
            return th

        return SymplecticModel(
            name="t2", dim=2, charts={"angles": box}, omega_fn=omega_fn, theta_fn=theta_fn,
            compact=True,
            closed_surface_box=((0.0, 2 * np.pi), (0.0, 2 * np.pi)),
            periods=(2 * np.pi, 2 * np.pi),
            params={"scale": c},
        )

    if name == "s2":
        r = float(params.get("radius", 1.0))
        delta = float(params.get("delta", 0.05))
        box = ChartBox("spherical", np.array([delta, 0.0]), np.array([np.pi - delta, 2 * np.pi]))

        def omega_fn(chart, pts):
            k = pts.shape[0]
            w = np.zeros((k, 2, 2))
            a = r * r * np.sin(pts[:, 0])
            w[:, 0, 1] = a
            w[:, 1, 0] = -a
            return w

        def theta_fn(chart, pts):
            th = np.zeros_like(pts)
            th[:, 1] = -r * r * np.cos(pts[:, 0])
            return th

        return SymplecticModel(
            name="s2", dim=2, charts={"spherical": box}, omega_fn=omega_fn, theta_fn=theta_fn,
            compact=True,
            closed_surface_box=((0.0, np.pi), (0.0, 2 * np.pi)),
            periods=(0.0, 2 * np.pi),
            params={"radius": r, "delta": delta},
        )

    raise ChartDomainError(f"unknown built-in model {name!r}")


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def pairing(omega_matrix, u, v):
    """Antisymmetrized evaluation u^T W v = sum_{i<j} W_ij (u_i v_j - u_j v_i).

    The pairwise form makes antisymmetry in (u, v) hold bit-exactly.
    """
    w = np.asarray(omega_matrix, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    dim = w.shape[0]
    total = 0.0
    for i in range(dim):
        for j in range(i + 1, dim):
            total += w[i, j] * (u[i] * v[j] - u[j] * v[i])
    return total


def pairing_batch(omega_matrices, u, v):
    """Vectorized u^T W v along a batch (no exact-antisymmetry guarantee)."""
    return np.einsum("ki,kij,kj->k", u, omega_matrices, v)


def eval_omega(model, p, u, v):
    """Symplectic pairing of two vectors based at p."""
    if u.chart_id != v.chart_id:
        raise ChartDomainError(f"vectors live in different charts: {u.chart_id!r}, {v.chart_id!r}")
    p = np.asarray(p, dtype=float)
    if p.shape[0] != model.dim:
        raise DimensionError(f"point has dimension {p.shape[0]}, model has {model.dim}")
    if u.components.shape[0] != model.dim or v.components.shape[0] != model.dim:
        raise DimensionError("vector component length does not match model dimension")
    if not (np.array_equal(u.base_point, p) and np.array_equal(v.base_point, p)):
        raise DimensionError("vectors are not based at the evaluation point")
    model.require_inside(u.chart_id, p)
    w = model.omega(u.chart_id, p)[0]
    return pairing(w, u.components, v.components)


def hamiltonian_fields_along(model, obs, chart_id, points, fd_step=None):
    """X_f at a batch of points: solve W X = df by partial-pivot elimination."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    w = model.omega(chart_id, pts)
    df = obs.gradients(chart_id, pts, fd_step=fd_step)
    x, min_rel_pivot = solve_small_batch(w, df)
    if min_rel_pivot < PIVOT_TOL:
        raise DegenerateFormError(
            f"symplectic matrix numerically singular (relative pivot {min_rel_pivot:.3e}) "
            f"for model {model.name!r}"
        )
    return x


def hamiltonian_vector_field(model, obs, chart_id, p, fd_step=None):
    """Hamiltonian field of an observable at a single chart point."""
    p = np.asarray(p, dtype=float)
    model.require_inside(chart_id, p)
    x = hamiltonian_fields_along(model, obs, chart_id, p[None, :], fd_step=fd_step)[0]
    return PointVector(chart_id, p, x)


def poisson_bracket(model, f, g, chart_id, p, fd_step=None):
    """{f, g}(p) = w(X_f, X_g)(p)."""
    p = np.asarray(p, dtype=float)
    model.require_inside(chart_id, p)
    xf = hamiltonian_fields_along(model, f, chart_id, p[None, :], fd_step=fd_step)[0]
    xg = hamiltonian_fields_along(model, g, chart_id, p[None, :], fd_step=fd_step)[0]
    w = model.omega(chart_id, p)[0]
    return pairing(w, xf, xg)


def poisson_bracket_values(model, f, g, chart_id, points, fd_step=None):
    """Pointwise {f, g} along a batch of points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    xf = hamiltonian_fields_along(model, f, chart_id, pts, fd_step=fd_step)
    xg = hamiltonian_fields_along(model, g, chart_id, pts, fd_step=fd_step)
    return pairing_batch(model.omega(chart_id, pts), xf, xg)


# ---------------------------------------------------------------------------
# observable constructors
# ---------------------------------------------------------------------------


def constant_observable(c, name=None):
    c = float(c)

    def eval_fn(chart, pts):
        return np.full(pts.shape[0], c)

    def grad_fn(chart, pts):
        return np.zeros_like(pts)

    return Observable(name or f"const({c})", eval_fn, grad_fn)


def coordinate_observable(index, name=None):
    def eval_fn(chart, pts):
        return pts[:, index].copy()

    def grad_fn(chart, pts):
        g = np.zeros_like(pts)
        g[:, index] = 1.0
        return g

    return Observable(name or f"coord{index}", eval_fn, grad_fn)


def poly2_observable(coeffs, name=None):
    """Polynomial in two chart coordinates: coeffs maps (i, j) -> c for u^i v^j."""
    items = sorted((tuple(k), float(v)) for k, v in coeffs.items())

    def eval_fn(chart, pts):
        u, v = pts[:, 0], pts[:, 1]
        out = np.zeros(pts.shape[0])
        for (i, j), c in items:
            out += c * u**i * v**j
        return out

    def grad_fn(chart, pts):
        u, v = pts[:, 0], pts[:, 1]
        g = np.zeros_like(pts)
        for (i, j), c in items:
            if i > 0:
                g[:, 0] += c * i * u ** (i - 1) * v**j
            if j > 0:
                g[:, 1] += c * j * u**i * v ** (j - 1)
        return g

    return Observable(name or f"poly{items}", eval_fn, grad_fn)


def random_poly2(rng, max_degree=2, scale=1.0, name=None):
    coeffs = {}
    for i in range(max_degree + 1):
        for j in range(max_degree + 1 - i):
            coeffs[(i, j)] = scale * rng.uniform(-1.0, 1.0)
    return poly2_observable(coeffs, name=name)


def observable_product(f, g, name=None):
    """Product observable with the analytic product-rule gradient."""

    def eval_fn(chart, pts):
        return f.values(chart, pts) * g.values(chart, pts)

    grad_fn = None
    if f.grad_fn is not None and g.grad_fn is not None:

        def grad_fn(chart, pts):
            return (
                f.gradients(chart, pts) * g.values(chart, pts)[:, None]
                + g.gradients(chart, pts) * f.values(chart, pts)[:, None]
            )

    return Observable(name or f"{f.name}*{g.name}", eval_fn, grad_fn)


def bracket_observable(model, f, g, chart_id=None, name=None):
    """{f, g} as an observable; gradient falls back to finite differences."""
    cid = chart_id or model.default_chart()

    def eval_fn(chart, pts):
        return poisson_bracket_values(model, f, g, cid, pts)

    return Observable(name or f"{{{f.name},{g.name}}}", eval_fn, None)

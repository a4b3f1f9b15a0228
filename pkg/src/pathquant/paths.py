"""Discretized paths and the induced calculus on path space.

A path is sampled on a uniform Simpson grid over [a, b] (default [0, 1]).
Functions on the base lift to integrated observables F(path) = integral of
f(path(t)) dt; polynomials in those lifts form the working function space.
The transgressed two-form pairs two fields along a path by integrating the
base pairing, Hamiltonian lifts are pointwise base Hamiltonian fields scaled
by Leibniz factors, and the local potential integrates a patch-wise choice
of primitive one-form along the path.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._kernels import cumulative_simpson, simpson
from .errors import ChartDomainError, DimensionError, PartitionDomainError
from .geometry import (
    ChartBox,
    Observable,
    bracket_observable,
    hamiltonian_fields_along,
    pairing_batch,
)

VARIATION_STEP = 1e-4
MAX_STEP_FRAC = 0.2


@dataclass(frozen=True)
class PathGrid:
    """Uniform grid with an even number of intervals (Simpson requirement)."""

    n: int
    interval: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.n < 8 or self.n % 2:
            raise DimensionError(f"path grid needs an even interval count >= 8, got {self.n}")
        a, b = self.interval
        if not b > a:
            raise DimensionError(f"bad grid interval {self.interval}")

    @property
    def dt(self):
        a, b = self.interval
        return (b - a) / self.n

    @property
    def nodes(self):
        a, b = self.interval
        return a + (b - a) * np.arange(self.n + 1) / self.n

    @property
    def length(self):
        a, b = self.interval
        return b - a

    def nearest_node(self, t):
        a, b = self.interval
        idx = int(round((t - a) / (b - a) * self.n))
        return min(max(idx, 0), self.n)


def _derivative_open(values, dt):
    """Fourth-order differentiation along axis 0 with one-sided stencils at the edges."""
    y = np.asarray(values, dtype=float)
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * dt)
    d[0] = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) / (12.0 * dt)
    d[1] = (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]) / (12.0 * dt)
    d[-2] = (3.0 * y[-1] + 10.0 * y[-2] - 18.0 * y[-3] + 6.0 * y[-4] - y[-5]) / (12.0 * dt)
    d[-1] = (25.0 * y[-1] - 48.0 * y[-2] + 36.0 * y[-3] - 16.0 * y[-4] + 3.0 * y[-5]) / (12.0 * dt)
    return d


def _derivative_periodic(values, dt):
    """Sixth-order central differentiation along axis 0 of a closed sample row.

    values[0] and values[-1] are the same point; the duplicate is dropped
    before rolling and restored afterwards.
    """
    y = np.asarray(values, dtype=float)[:-1]
    out = np.empty((y.shape[0] + 1,) + y.shape[1:])
    d = (
        np.roll(y, -3, axis=0)
        - 9.0 * np.roll(y, -2, axis=0)
        + 45.0 * np.roll(y, -1, axis=0)
        - 45.0 * np.roll(y, 1, axis=0)
        + 9.0 * np.roll(y, 2, axis=0)
        - np.roll(y, 3, axis=0)
    ) / (60.0 * dt)
    out[:-1] = d
    out[-1] = d[0]
    return out


def _derivative_closed(values, dt, periods=None):
    """Closed-direction derivative that tolerates winding in angle coordinates.

    values: (rows, ..., dim) with the duplicate seam row last.  Coordinates
    with a nonzero period may wind; the winding ramp is split off (making the
    remainder genuinely periodic), differentiated exactly, and added back.
    """
    y = np.asarray(values, dtype=float)
    if periods is None or not np.any(np.asarray(periods)):
        return _derivative_periodic(y, dt)
    n = y.shape[0] - 1
    work = y.copy()
    slope = np.zeros(y.shape[1:])
    ramp = np.arange(n + 1) / n
    ramp = ramp.reshape((n + 1,) + (1,) * (y.ndim - 1))
    for c, period in enumerate(periods):
        if period <= 0:
            continue
        u = np.unwrap(y[..., c], axis=0, period=period)
        winding = np.round((u[-1] - u[0]) / period)
        work[..., c] = u - winding[None, ...] * period * ramp[..., 0]
        slope[..., c] = winding * period / (n * dt)
    return _derivative_periodic(work, dt) + slope[None, ...]


@dataclass(frozen=True)
class DiscretePath:
    """Samples of a smooth map [a, b] -> M inside a single chart."""

    model: object
    chart_id: str
    grid: PathGrid
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if pts.shape != (self.grid.n + 1, self.model.dim):
            raise DimensionError(
                f"path points have shape {pts.shape}, expected {(self.grid.n + 1, self.model.dim)}"
            )
        self.model.require_inside(self.chart_id, pts)
        box = self.model.chart(self.chart_id)
        widths = box.hi - box.lo
        if np.all(np.isfinite(widths)):
            max_step = MAX_STEP_FRAC * widths
            steps = np.abs(np.diff(pts, axis=0))
            if np.any(steps > max_step):
                raise ChartDomainError(
                    "consecutive path points are farther apart than the configured "
                    f"maximum step ({MAX_STEP_FRAC} of the chart box width)"
                )

    def velocities(self):
        cached = self.__dict__.get("_velocities")
        if cached is None:
            cached = _derivative_open(self.points, self.grid.dt)
            object.__setattr__(self, "_velocities", cached)
        return cached

    def displaced(self, vectors, eps):
        """New path shifted by eps * vectors (vectors: constant (dim,) or (n+1, dim))."""
        vec = np.asarray(vectors, dtype=float)
        if vec.ndim == 1:
            vec = np.broadcast_to(vec, self.points.shape)
        return DiscretePath(self.model, self.chart_id, self.grid, self.points + eps * vec)


@dataclass(frozen=True)
class PathTangent:
    """Vector field along a path, sampled on the same grid."""

    path: DiscretePath
    vectors: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vectors, dtype=float)
        object.__setattr__(self, "vectors", vec)
        if vec.shape != self.path.points.shape:
            raise DimensionError(
                f"tangent samples have shape {vec.shape}, path has {self.path.points.shape}"
            )


def constant_variation(path, vector):
    vec = np.asarray(vector, dtype=float)
    return PathTangent(path, np.broadcast_to(vec, path.points.shape).copy())


def _require_aligned(path, tangent):
    if tangent.path is not path and not np.array_equal(tangent.path.points, path.points):
        raise DimensionError("tangent is not aligned with the given path")


@dataclass(frozen=True)
class PathObservable:
    """Finite sum of coefficients times products of powers of integrated observables."""

    terms: tuple

    def __post_init__(self):
        norm = []
        for coeff, factors in self.terms:
            norm.append((float(coeff), tuple((obs, int(power)) for obs, power in factors)))
            for _, power in norm[-1][1]:
                if power < 1:
                    raise DimensionError("factor powers must be positive integers")
        object.__setattr__(self, "terms", tuple(norm))


def tilde_observable(f, coeff=1.0):
    """The lift of a single base observable, scaled by coeff."""
    return PathObservable(((coeff, ((f, 1),)),))


def path_constant(c):
    """Constant function on path space (empty product convention)."""
    return PathObservable(((float(c), ()),))


def path_product(f, g, coeff=1.0):
    return PathObservable(((coeff, ((f, 1), (g, 1))),))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def eval_tilde(f, path):
    """Simpson value of the integral of f along the path."""
    values = f.values(path.chart_id, path.points)
    return float(simpson(values, path.grid.dt))


def eval_path_observable(phi, path):
    """Evaluate a polynomial in integrated observables; empty term list gives 0."""
    total = 0.0
    for coeff, factors in phi.terms:
        prod = coeff
        for obs, power in factors:
            prod *= eval_tilde(obs, path) ** power
        total += prod
    return total


def product_law_residual(f, g, path):
    """Defect of the splitting of a product of line integrals into running integrals."""
    dt = path.grid.dt
    fv = f.values(path.chart_id, path.points)
    gv = g.values(path.chart_id, path.points)
    f_run = cumulative_simpson(fv, dt)
    g_run = cumulative_simpson(gv, dt)
    lhs = float(simpson(fv, dt)) * float(simpson(gv, dt))
    rhs = float(simpson(fv * g_run, dt)) + float(simpson(f_run * gv, dt))
    return abs(lhs - rhs)


def d_tilde(f, path, tangent):
    """Differential of a lifted observable applied to a field along the path."""
    _require_aligned(path, tangent)
    df = f.gradients(path.chart_id, path.points)
    return float(simpson(np.sum(df * tangent.vectors, axis=1), path.grid.dt))


def omega_tilde(model, path, t1, t2):
    """Transgressed two-form: integral of the base pairing of two fields."""
    _require_aligned(path, t1)
    _require_aligned(path, t2)
    w = model.omega(path.chart_id, path.points)
    return float(simpson(pairing_batch(w, t1.vectors, t2.vectors), path.grid.dt))


def _tilde_values(phi, path):
    """Cache of eval_tilde per distinct factor observable in phi."""
    values = {}
    for _, factors in phi.terms:
        for obs, _ in factors:
            if id(obs) not in values:
                values[id(obs)] = eval_tilde(obs, path)
    return values


def hamiltonian_lift(model, phi, path):
    """Field along the path generating phi, via the Leibniz expansion.

    A single lifted factor contributes its pointwise base Hamiltonian field;
    a product term scales each factor's field by the remaining integrated
    values.  Satisfies pairing(lift, w) = -d(phi)(w) on the grid.
    """
    tv = _tilde_values(phi, path)
    fields = {}
    out = np.zeros_like(path.points)
    for coeff, factors in phi.terms:
        for j, (obs, power) in enumerate(factors):
            scale = coeff * power * tv[id(obs)] ** (power - 1)
            for k, (other, opow) in enumerate(factors):
                if k != j:
                    scale *= tv[id(other)] ** opow
            if scale == 0.0:
                continue
            if id(obs) not in fields:
                fields[id(obs)] = hamiltonian_fields_along(
                    model, obs, path.chart_id, path.points
                )
            out += scale * fields[id(obs)]
    return PathTangent(path, out)


def d_path_observable(model, phi, path, tangent):
    """d(phi) applied to a field along the path (Leibniz over factors)."""
    tv = _tilde_values(phi, path)
    total = 0.0
    for coeff, factors in phi.terms:
        for j, (obs, power) in enumerate(factors):
            scale = coeff * power * tv[id(obs)] ** (power - 1)
            for k, (other, opow) in enumerate(factors):
                if k != j:
                    scale *= tv[id(other)] ** opow
            if scale != 0.0:
                total += scale * d_tilde(obs, path, tangent)
    return total


def poisson_tilde(model, phi1, phi2, path):
    """Path-space bracket via the transgressed pairing of the two lifts."""
    lift1 = hamiltonian_lift(model, phi1, path)
    lift2 = hamiltonian_lift(model, phi2, path)
    return omega_tilde(model, path, lift1, lift2)


def path_observable_bracket(model, phi1, phi2, chart_id=None):
    """The bracket of two polynomial path observables, again as a path observable.

    Expanding by Leibniz, every pair of factors contributes the lift of the
    pointwise bracket of the two base observables times the remaining factors.
    """
    terms = []
    for c1, factors1 in phi1.terms:
        for j, (f, fp) in enumerate(factors1):
            rest1 = [(o, p) for k, (o, p) in enumerate(factors1) if k != j]
            if fp > 1:
                rest1.append((f, fp - 1))
            for c2, factors2 in phi2.terms:
                for l, (g, gp) in enumerate(factors2):
                    rest2 = [(o, p) for k, (o, p) in enumerate(factors2) if k != l]
                    if gp > 1:
                        rest2.append((g, gp - 1))
                    br = bracket_observable(model, f, g, chart_id=chart_id)
                    terms.append((c1 * c2 * fp * gp, tuple(rest1 + rest2 + [(br, 1)])))
    return PathObservable(tuple(terms))


# ---------------------------------------------------------------------------
# local potential along partitioned paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PotentialPatch:
    """Sub-interval with its own primitive one-form and validity domain."""

    t_lo: float
    t_hi: float
    theta_fn: object
    domain: Optional[ChartBox] = None


def default_partition(model, path):
    box = model.chart(path.chart_id)
    a, b = path.grid.interval
    return [PotentialPatch(a, b, model.theta_fn, box)]


def beta_eval(model, partition, path, tangent):
    """Patch-wise line integral of the local potential applied to the field.

    Each segment is rescaled to the unit interval by its affine map and
    integrated with Simpson there; with the affine Jacobian included the
    segment contributions add up, so the value is partition-independent
    whenever the patches share a primitive.
    """
    _require_aligned(path, tangent)
    if partition is None:
        partition = default_partition(model, path)
    grid = path.grid
    nodes = grid.nodes
    total = 0.0
    covered = grid.interval[0]
    for patch in partition:
        i_lo = grid.nearest_node(patch.t_lo)
        i_hi = grid.nearest_node(patch.t_hi)
        if abs(nodes[i_lo] - covered) > 1e-12:
            raise PartitionDomainError("partition sub-intervals must tile the grid interval")
        covered = nodes[i_hi]
        if (i_hi - i_lo) < 2 or (i_hi - i_lo) % 2:
            raise PartitionDomainError(
                "each partition segment must span an even number of grid intervals >= 2"
            )
        seg_pts = path.points[i_lo : i_hi + 1]
        if patch.domain is not None and not np.all(patch.domain.contains(seg_pts)):
            raise PartitionDomainError(
                f"path segment [{patch.t_lo}, {patch.t_hi}] leaves its potential domain"
            )
        theta = np.asarray(patch.theta_fn(path.chart_id, seg_pts), dtype=float)
        integrand = np.sum(theta * tangent.vectors[i_lo : i_hi + 1], axis=1)
        total += float(simpson(integrand, grid.dt))
    if abs(covered - grid.interval[1]) > 1e-12:
        raise PartitionDomainError("partition does not reach the end of the grid interval")
    return total


# ---------------------------------------------------------------------------
# finite-difference exterior derivative on path space
# ---------------------------------------------------------------------------


def fd_exterior_derivative(one_form, path, v_const, w_const, step=VARIATION_STEP):
    """d(one_form)(V, W) for constant coordinate variations V, W.

    one_form(path, vectors) -> float.  Constant variations commute, so the
    bracket term of the intrinsic formula vanishes and central differences of
    the two slot evaluations suffice.
    """
    v = np.asarray(v_const, dtype=float)
    w = np.asarray(w_const, dtype=float)

    def slot(p, direction):
        vec = np.broadcast_to(direction, p.points.shape)
        return one_form(p, vec)

    term_v = (
        slot(path.displaced(v, step), w) - slot(path.displaced(v, -step), w)
    ) / (2.0 * step)
    term_w = (
        slot(path.displaced(w, step), v) - slot(path.displaced(w, -step), v)
    ) / (2.0 * step)
    return term_v - term_w


def prop_dbeta_residual(model, partition, path, v_const, w_const, step=VARIATION_STEP):
    """|d(beta)(V, W) - transgressed pairing of V, W| for constant variations."""

    def beta_form(p, vectors):
        return beta_eval(model, partition, p, PathTangent(p, np.array(vectors)))

    dbeta = fd_exterior_derivative(beta_form, path, v_const, w_const, step=step)
    target = omega_tilde(
        model, path, constant_variation(path, v_const), constant_variation(path, w_const)
    )
    return abs(dbeta - target)


# ---------------------------------------------------------------------------
# parametric path families
# ---------------------------------------------------------------------------


def path_from_function(model, chart_id, grid, fn):
    t = grid.nodes
    pts = np.stack([np.asarray(fn(ti), dtype=float) for ti in t])
    return DiscretePath(model, chart_id, grid, pts)


def line_path(model, grid, start, end, chart_id=None):
    chart_id = chart_id or model.default_chart()
    s = np.asarray(start, dtype=float)
    e = np.asarray(end, dtype=float)
    a, b = grid.interval
    u = (grid.nodes - a) / (b - a)
    return DiscretePath(model, chart_id, grid, s[None, :] + u[:, None] * (e - s)[None, :])


def circle_path(model, grid, center=(0.0, 0.0), radius=1.0, turns=1.0, phase=0.0, chart_id=None):
    chart_id = chart_id or model.default_chart()
    c = np.asarray(center, dtype=float)
    a, b = grid.interval
    u = (grid.nodes - a) / (b - a)
    ang = 2.0 * np.pi * turns * u + phase
    pts = c[None, :] + radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    return DiscretePath(model, chart_id, grid, pts)


def lissajous_path(
    model, grid, center=(0.0, 0.0), amplitude=(1.0, 1.0), freq=(1.0, 2.0), phase=0.5,
    chart_id=None,
):
    chart_id = chart_id or model.default_chart()
    c = np.asarray(center, dtype=float)
    ax, ay = amplitude
    fx, fy = freq
    a, b = grid.interval
    u = (grid.nodes - a) / (b - a)
    pts = np.stack(
        [
            c[0] + ax * np.sin(2.0 * np.pi * fx * u + phase),
            c[1] + ay * np.sin(2.0 * np.pi * fy * u),
        ],
        axis=1,
    )
    return DiscretePath(model, chart_id, grid, pts)


def arc_path(
    model, grid, phi_center=1.2, phi_amp=0.4, psi_start=1.0, psi_span=2.0, chart_id=None
):
    """Smooth arc in spherical coordinates for the sphere chart."""
    chart_id = chart_id or model.default_chart()
    a, b = grid.interval
    u = (grid.nodes - a) / (b - a)
    pts = np.stack(
        [phi_center + phi_amp * np.sin(np.pi * u), psi_start + psi_span * u], axis=1
    )
    return DiscretePath(model, chart_id, grid, pts)


_FAMILIES = {
    "line": line_path,
    "circle": circle_path,
    "lissajous": lissajous_path,
    "arc": arc_path,
}


def make_path(model, grid, family, **params):
    """Build a named parametric path, or one from explicit nodes."""
    if family == "nodes":
        return DiscretePath(
            model, params.get("chart_id") or model.default_chart(), grid,
            np.asarray(params["points"], dtype=float),
        )
    try:
        builder = _FAMILIES[family]
    except KeyError:
        raise ChartDomainError(f"unknown path family {family!r}") from None
    return builder(model, grid, **params)

"""First-order path integrals of base forms and the induced potential one-form.

Integrating a degree-p base form against the path velocity produces a
degree-(p-1) form on path space; truncating the integral at an interior
parameter and averaging the truncations over the interval yields the global
potential one-form whose exterior derivative completes the pullback of the
base form to the full transgressed two-form.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import cumulative_simpson, simpson
from .errors import DegreeError
from .paths import PathTangent, constant_variation, fd_exterior_derivative, omega_tilde

VARIATION_STEP = 1e-4


@dataclass(frozen=True)
class SampledPForm:
    """Degree 1 or 2 form given by a vectorized component evaluator.

    eval_fn(chart, points, *vector_batches) -> values, with one vector batch
    per form degree.
    """

    name: str
    degree: int
    eval_fn: object

    def __post_init__(self):
        if self.degree not in (1, 2):
            raise DegreeError(f"only degree 1 and 2 forms are supported, got {self.degree}")

    def values(self, chart_id, points, *vectors):
        if len(vectors) != self.degree:
            raise DegreeError(
                f"degree-{self.degree} form applied to {len(vectors)} vector arguments"
            )
        return np.asarray(self.eval_fn(chart_id, points, *vectors), dtype=float)


@dataclass(frozen=True)
class TruncationPoint:
    """Upper integration limit, snapped to the nearest grid node."""

    t: float

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise DegreeError(f"truncation point must lie in [0, 1], got {self.t}")

    def node(self, grid):
        a, b = grid.interval
        return grid.nearest_node(a + self.t * (b - a))


def omega_pform(model):
    def eval_fn(chart, pts, u, v):
        w = model.omega(chart, pts)
        return np.einsum("ki,kij,kj->k", u, w, v)

    return SampledPForm(f"omega[{model.name}]", 2, eval_fn)


def theta_pform(model):
    def eval_fn(chart, pts, u):
        th = model.theta(chart, pts)
        return np.sum(th * u, axis=1)

    return SampledPForm(f"theta[{model.name}]", 1, eval_fn)


def coordinate_pform(index, name=None):
    def eval_fn(chart, pts, u):
        return u[:, index].copy()

    return SampledPForm(name or f"d(coord{index})", 1, eval_fn)


def _chen_integrand(form, path, tangents):
    for tg in tangents:
        if tg.vectors.shape != path.points.shape:
            raise DegreeError("tangent arguments must be sampled on the path grid")
    args = [path.velocities()] + [tg.vectors for tg in tangents]
    return form.values(path.chart_id, path.points, *args)


def chen_first(form, path, *tangents):
    """Integral of the form against the path velocity (and p-1 fields along)."""
    if len(tangents) != form.degree - 1:
        raise DegreeError(
            f"degree-{form.degree} form needs {form.degree - 1} tangent arguments, "
            f"got {len(tangents)}"
        )
    prefix = chen_prefix(form, path, *tangents)
    return float(prefix[-1])


def chen_prefix(form, path, *tangents):
    """Running truncated integrals at every grid node."""
    if len(tangents) != form.degree - 1:
        raise DegreeError(
            f"degree-{form.degree} form needs {form.degree - 1} tangent arguments, "
            f"got {len(tangents)}"
        )
    integrand = _chen_integrand(form, path, tangents)
    return cumulative_simpson(integrand, path.grid.dt)


def chen_truncated(form, path, point, *tangents):
    """Truncated integral up to a snapped interior node; t=1 reproduces chen_first."""
    idx = point.node(path.grid) if isinstance(point, TruncationPoint) else TruncationPoint(point).node(path.grid)
    prefix = chen_prefix(form, path, *tangents)
    return float(prefix[idx])


def chen_stokes_residual(model, form, path, point, v_const, w_const, step=VARIATION_STEP):
    """Exterior-derivative identity defect for a closed degree-2 form.

    Compares the numerical differential of the truncated integral on constant
    variations with the difference of the endpoint pullbacks; the integral
    term of the general identity is absent because the form is closed.
    """
    tp = point if isinstance(point, TruncationPoint) else TruncationPoint(point)
    idx = tp.node(path.grid)

    def truncated_form(p, vectors):
        return float(chen_prefix(form, p, PathTangent(p, np.array(vectors)))[idx])

    lhs = fd_exterior_derivative(truncated_form, path, v_const, w_const, step=step)
    ends = path.points[[idx, 0]]
    vals = form.values(
        path.chart_id,
        ends,
        np.broadcast_to(v_const, ends.shape),
        np.broadcast_to(w_const, ends.shape),
    )
    rhs = vals[0] - vals[1]
    return abs(lhs - rhs)


def lambda_eval(model, path, tangent):
    """Potential one-form: average over t of the truncated pairing integrals.

    Reuses the running-integral array, so the nested integral costs O(n).
    """
    form = omega_pform(model)
    prefix = chen_prefix(form, path, tangent)
    return float(simpson(prefix, path.grid.dt))


def lemma_decomposition_residual(model, path, v_const, w_const, step=VARIATION_STEP):
    """Defect of: transgressed pairing = start-point pullback + d(potential).

    On a grid over [a, b] the start-point pullback carries the (b - a) factor
    of the rescaled base form.
    """

    def lam(p, vectors):
        return lambda_eval(model, p, PathTangent(p, np.array(vectors)))

    dlam = fd_exterior_derivative(lam, path, v_const, w_const, step=step)
    v = constant_variation(path, v_const)
    w = constant_variation(path, w_const)
    full = omega_tilde(model, path, v, w)
    start = path.points[0][None, :]
    base = float(
        omega_pform(model).values(
            path.chart_id, start, np.asarray(v_const)[None, :], np.asarray(w_const)[None, :]
        )[0]
    )
    return abs(full - path.grid.length * base - dlam)

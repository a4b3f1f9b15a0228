"""Named verification suites.

Every check computes a residual against a reference and a default tolerance
(overridable per scenario); the runner assembles them into a ResidualReport.
Checks are independent and may run concurrently (set PATHQUANT_THREADS); the
random stream of each check is derived from the scenario seed and the check
id, so reports are deterministic regardless of execution order.
"""

import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import geometry as G
from . import klein_gordon as KG
from . import paths as P
from . import prequantum as Q
from . import transgression as T
from .errors import PathquantError, SuiteUnknownError
from .report import CheckRecord, ResidualReport

SUITE_NAMES = ("poisson", "potential", "chen", "holonomy", "operators", "kg")


@dataclass
class CheckContext:
    scenario: object
    rng: np.random.Generator

    @property
    def grid(self):
        return self.scenario.grid

    def path_grid(self, n=None):
        return P.PathGrid(n or self.grid["n"])


_REGISTRY = []


def check(check_id, claim, suites, tolerance):
    def wrap(fn):
        _REGISTRY.append(
            {
                "id": check_id,
                "claim": claim,
                "suites": tuple(suites),
                "tolerance": tolerance,
                "fn": fn,
            }
        )
        return fn

    return wrap


def _scenario_model(scenario):
    params = {k: v for k, v in scenario.model.items() if k != "name"}
    return G.make_model(scenario.model["name"], **params)


def _random_poly_pair(rng, max_degree=2, scale=1.0):
    return (
        G.random_poly2(rng, max_degree=max_degree, scale=scale),
        G.random_poly2(rng, max_degree=max_degree, scale=scale),
    )


def _test_paths_r2(ctx, n=None):
    r2 = G.make_model("r2")
    grid = ctx.path_grid(n)
    return r2, [
        P.line_path(r2, grid, [0.0, 0.0], [1.0, 0.0]),
        P.circle_path(r2, grid, center=(0.2, -0.1), radius=0.8),
        P.lissajous_path(r2, grid, center=(0.1, 0.3), amplitude=(0.7, 0.5), freq=(1, 2)),
    ]


def _test_paths_s2(ctx, n=None):
    s2 = G.make_model("s2", radius=1.0)
    grid = ctx.path_grid(n)
    return s2, [
        P.arc_path(s2, grid, phi_center=1.2, phi_amp=0.4, psi_start=1.0, psi_span=2.0),
        P.arc_path(s2, grid, phi_center=1.7, phi_amp=-0.5, psi_start=4.0, psi_span=-1.5),
    ]


# ---------------------------------------------------------------------------
# poisson suite: base brackets and the path-space bracket
# ---------------------------------------------------------------------------


@check(
    "base_bracket_xy",
    "coordinate bracket {x, y} equals 1 everywhere on the plane",
    ("poisson",),
    1e-12,
)
def _base_bracket_xy(ctx):
    r2 = G.make_model("r2")
    x = G.coordinate_observable(0, "x")
    y = G.coordinate_observable(1, "y")
    values = [
        G.poisson_bracket(r2, x, y, "xy", ctx.rng.uniform(-3, 3, size=2)) for _ in range(10)
    ]
    worst = max(abs(v - 1.0) for v in values)
    return values[0], 1.0, worst


@check(
    "base_hamiltonian_residual",
    "Hamiltonian fields satisfy the contraction identity against -df",
    ("poisson",),
    1e-10,
)
def _base_ham_residual(ctx):
    worst = 0.0
    for model, chart, lo, hi in (
        (G.make_model("r2"), "xy", [-2, -2], [2, 2]),
        (G.make_model("s2", radius=1.0), "spherical", [0.4, 0.5], [2.7, 5.8]),
    ):
        for _ in range(5):
            f = G.random_poly2(ctx.rng)
            p = ctx.rng.uniform(lo, hi)
            xf = G.hamiltonian_vector_field(model, f, chart, p)
            w = model.omega(chart, p)[0]
            df = f.gradients(chart, p[None, :])[0]
            contraction = w.T @ xf.components  # components of i_X w
            scale = max(np.max(np.abs(df)), 1e-30)
            worst = max(worst, float(np.max(np.abs(contraction + df))) / scale)
    return worst, 0.0, worst


@check(
    "base_jacobi",
    "cyclic bracket sum vanishes on polynomial triples (outer gradients by FD)",
    ("poisson",),
    1e-6,
)
def _base_jacobi(ctx):
    r2 = G.make_model("r2")
    worst = 0.0
    for _ in range(5):
        f, g = _random_poly_pair(ctx.rng, max_degree=3)
        h = G.random_poly2(ctx.rng, max_degree=3)
        p = ctx.rng.uniform(-1.5, 1.5, size=2)
        total = 0.0
        for a, b, c in ((f, g, h), (g, h, f), (h, f, g)):
            inner = G.bracket_observable(r2, b, c)
            total += G.poisson_bracket(r2, a, inner, "xy", p)
        worst = max(worst, abs(total))
    return worst, 0.0, worst


@check(
    "base_leibniz",
    "{fg, h} = f{g, h} + g{f, h} with analytic gradients",
    ("poisson",),
    1e-8,
)
def _base_leibniz(ctx):
    r2 = G.make_model("r2")
    worst = 0.0
    for _ in range(5):
        f, g = _random_poly_pair(ctx.rng)
        h = G.random_poly2(ctx.rng)
        p = ctx.rng.uniform(-1.5, 1.5, size=2)
        fg = G.observable_product(f, g)
        lhs = G.poisson_bracket(r2, fg, h, "xy", p)
        rhs = f.value("xy", p) * G.poisson_bracket(r2, g, h, "xy", p) + g.value(
            "xy", p
        ) * G.poisson_bracket(r2, f, h, "xy", p)
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-12))
    return worst, 0.0, worst


@check(
    "tilde_closed_forms",
    "line-integral lifts of coordinates match closed forms on straight paths",
    ("poisson",),
    1e-12,
)
def _tilde_closed_forms(ctx):
    r2 = G.make_model("r2")
    grid = ctx.path_grid()
    x = G.coordinate_observable(0, "x")
    y = G.coordinate_observable(1, "y")
    line = P.line_path(r2, grid, [0, 0], [1, 0])
    diag = P.line_path(r2, grid, [0, 0], [1, 1])
    worst = abs(P.eval_tilde(x, line) - 0.5)
    worst = max(worst, abs(P.eval_path_observable(P.path_product(x, y), diag) - 0.25))
    worst = max(
        worst, abs(P.eval_path_observable(P.PathObservable(((2.0, ((x, 2),)),)), line) - 0.5)
    )
    worst = max(worst, abs(P.eval_path_observable(P.PathObservable(()), diag)))
    return worst, 0.0, worst


@check(
    "product_law_closed_form",
    "running-integral split of a product of line integrals (closed-form case)",
    ("poisson",),
    1e-10,
)
def _product_law_closed(ctx):
    r2 = G.make_model("r2")
    x = G.coordinate_observable(0, "x")
    line = P.line_path(r2, ctx.path_grid(), [0, 0], [1, 0])
    return P.product_law_residual(x, x, line), 0.0, P.product_law_residual(x, x, line)


@check(
    "product_law_random",
    "running-integral split of products on random smooth pairs",
    ("poisson",),
    1e-8,
)
def _product_law_random(ctx):
    r2, paths = _test_paths_r2(ctx)
    worst = 0.0
    for path in paths:
        for _ in range(5):
            f, g = _random_poly_pair(ctx.rng)
            worst = max(worst, P.product_law_residual(f, g, path))
    return worst, 0.0, worst


@check(
    "dtilde_fd_agreement",
    "differential of lifted observables matches directional path differences",
    ("poisson",),
    1e-5,
)
def _dtilde_fd(ctx):
    r2, paths = _test_paths_r2(ctx)
    eps = 1e-4
    worst = 0.0
    for path in paths:
        f = G.random_poly2(ctx.rng)
        vec = ctx.rng.uniform(-1, 1, size=2)
        v = P.constant_variation(path, vec)
        analytic = P.d_tilde(f, path, v)
        fd = (
            P.eval_tilde(f, path.displaced(vec, eps)) - P.eval_tilde(f, path.displaced(vec, -eps))
        ) / (2 * eps)
        worst = max(worst, abs(analytic - fd) / max(abs(fd), 1e-12))
    return worst, 0.0, worst


@check(
    "omega_tilde_quadrature_order",
    "transgressed pairing converges at fourth order under grid doubling",
    ("poisson",),
    0.5,
)
def _omega_tilde_order(ctx):
    r2 = G.make_model("r2")
    errors = []
    ns = [16, 32, 64]
    for n in ns:
        grid = P.PathGrid(n)
        path = P.circle_path(r2, grid, radius=0.8)
        t = grid.nodes
        v1 = P.PathTangent(path, np.stack([np.sin(4 * np.pi * t), np.cos(2 * np.pi * t)], axis=1))
        v2 = P.PathTangent(path, np.stack([np.cos(2 * np.pi * t), t**2], axis=1))
        fine = P.PathGrid(512)
        pf = P.circle_path(r2, fine, radius=0.8)
        tf = fine.nodes
        w1 = P.PathTangent(pf, np.stack([np.sin(4 * np.pi * tf), np.cos(2 * np.pi * tf)], axis=1))
        w2 = P.PathTangent(pf, np.stack([np.cos(2 * np.pi * tf), tf**2], axis=1))
        ref = P.omega_tilde(r2, pf, w1, w2)
        errors.append(abs(P.omega_tilde(r2, path, v1, v2) - ref))
    slope = np.polyfit(np.log(ns), np.log(errors), 1)[0]
    order = -slope
    return order, 4.0, abs(order - 4.0)


@check(
    "weak_nondegeneracy_probe",
    "no sampled nonzero field annihilates the transgressed pairing",
    ("poisson",),
    0.0,
)
def _nondegeneracy(ctx):
    r2, paths = _test_paths_r2(ctx)
    basis = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    value = np.inf
    for path in paths:
        vec = ctx.rng.normal(size=path.points.shape)
        vec /= np.max(np.abs(vec))
        v = P.PathTangent(path, vec)
        best = max(
            abs(P.omega_tilde(r2, path, v, P.constant_variation(path, w))) for w in basis
        )
        value = min(value, best)
    return value, 1.0, max(0.0, 1e-8 - value)


@check(
    "lift_single_factor",
    "the generating field of a single lifted observable is the pointwise base field",
    ("poisson",),
    1e-12,
)
def _lift_single(ctx):
    r2, paths = _test_paths_r2(ctx)
    x = G.coordinate_observable(0, "x")
    y = G.coordinate_observable(1, "y")
    worst = 0.0
    for path in paths:
        lx = P.hamiltonian_lift(r2, P.tilde_observable(x), path)
        ly = P.hamiltonian_lift(r2, P.tilde_observable(y), path)
        worst = max(worst, float(np.max(np.abs(lx.vectors - [0.0, 1.0]))))
        worst = max(worst, float(np.max(np.abs(ly.vectors - [-1.0, 0.0]))))
        zero = P.hamiltonian_lift(r2, P.path_constant(3.3), path)
        worst = max(worst, float(np.max(np.abs(zero.vectors))))
    return worst, 0.0, worst


@check(
    "lift_product_closed_form",
    "generating field of a two-factor product matches its Leibniz closed form",
    ("poisson",),
    1e-8,
)
def _lift_product(ctx):
    r2 = G.make_model("r2")
    x = G.coordinate_observable(0, "x")
    y = G.coordinate_observable(1, "y")
    diag = P.line_path(r2, ctx.path_grid(), [0, 0], [1, 1])
    lift = P.hamiltonian_lift(r2, P.path_product(x, y), diag)
    worst = float(np.max(np.abs(lift.vectors - [-0.5, 0.5])))
    return worst, 0.0, worst


@check(
    "lift_defining_contract",
    "pairing of a lift with any test field reproduces minus the differential",
    ("poisson",),
    1e-6,
)
def _lift_contract(ctx):
    r2, paths = _test_paths_r2(ctx)
    worst = 0.0
    for path in paths:
        f, g = _random_poly_pair(ctx.rng)
        phi = P.PathObservable(
            (
                (ctx.rng.uniform(-1, 1), ((f, 2), (g, 1))),
                (ctx.rng.uniform(-1, 1), ((g, 1),)),
                (0.7, ()),
            )
        )
        lift = P.hamiltonian_lift(r2, phi, path)
        t = path.grid.nodes
        tests = [
            P.constant_variation(path, [1.0, 0.0]),
            P.constant_variation(path, [0.0, 1.0]),
            P.PathTangent(path, np.stack([np.sin(2 * np.pi * t), np.cos(2 * np.pi * t)], axis=1)),
        ]
        for w in tests:
            lhs = P.omega_tilde(r2, path, lift, w)
            rhs = -P.d_path_observable(r2, phi, path, w)
            worst = max(worst, abs(lhs - rhs))
    return worst, 0.0, worst


def _cor22_worst(ctx, model, chart, paths, pairs):
    """Bracket of two lifts vs the integrated pointwise bracket (contraction form)."""
    worst = 0.0
    for _ in range(pairs):
        f, g = _random_poly_pair(ctx.rng)
        path = paths[int(ctx.rng.integers(len(paths)))]
        lhs = P.poisson_tilde(model, P.tilde_observable(f), P.tilde_observable(g), path)
        xf = P.hamiltonian_fields_along(model, f, chart, path.points)
        dg = g.gradients(chart, path.points)
        from ._kernels import simpson

        rhs = float(simpson(np.sum(dg * xf, axis=1), path.grid.dt))
        worst = max(worst, abs(lhs - rhs))
    return worst


@check(
    "cor22_r2",
    "path-space bracket of two lifts equals the integrated base bracket (plane)",
    ("poisson",),
    1e-6,
)
def _cor22_r2(ctx):
    r2, paths = _test_paths_r2(ctx)
    worst = _cor22_worst(ctx, r2, "xy", paths, ctx.scenario.random["pairs"])
    return worst, 0.0, worst


@check(
    "cor22_s2",
    "path-space bracket of two lifts equals the integrated base bracket (sphere)",
    ("poisson",),
    1e-6,
)
def _cor22_s2(ctx):
    s2, paths = _test_paths_s2(ctx)
    worst = _cor22_worst(ctx, s2, "spherical", paths, ctx.scenario.random["pairs"])
    return worst, 0.0, worst


@check(
    "poisson_tilde_closed_forms",
    "path-space brackets of coordinate lifts match closed forms",
    ("poisson",),
    1e-10,
)
def _poisson_tilde_closed(ctx):
    r2 = G.make_model("r2")
    x = G.coordinate_observable(0, "x")
    y = G.coordinate_observable(1, "y")
    diag = P.line_path(r2, ctx.path_grid(), [0, 0], [1, 1])
    xt, yt = P.tilde_observable(x), P.tilde_observable(y)
    worst = abs(P.poisson_tilde(r2, xt, yt, diag) - 1.0)
    worst = max(worst, abs(P.poisson_tilde(r2, P.path_product(x, y), yt, diag) - 0.5))
    worst = max(worst, abs(P.poisson_tilde(r2, xt, xt, diag)))
    return worst, 0.0, worst


def _rk4_flow(model, obs, chart, points, eps):
    def field(pts):
        return P.hamiltonian_fields_along(model, obs, chart, pts)

    k1 = field(points)
    k2 = field(points + 0.5 * eps * k1)
    k3 = field(points + 0.5 * eps * k2)
    k4 = field(points + eps * k3)
    return points + eps / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


@check(
    "lie_bracket_pointwise",
    "lift of the integrated bracket observable is the pointwise bracket field",
    ("poisson",),
    1e-10,
)
def _lie_lift_pointwise(ctx):
    r2 = G.make_model("r2")
    f = G.poly2_observable({(2, 0): 0.5}, "xx/2")
    g = G.coordinate_observable(1, "y")
    path = P.circle_path(r2, ctx.path_grid(), center=(0.1, 0.2), radius=0.7)
    lifted = P.hamiltonian_lift(
        r2, P.tilde_observable(G.bracket_observable(r2, f, g)), path
    )
    pointwise = P.hamiltonian_fields_along(
        r2, G.bracket_observable(r2, f, g), "xy", path.points
    )
    worst = float(np.max(np.abs(lifted.vectors - pointwise)))
    return worst, 0.0, worst


@check(
    "lie_bracket_flow",
    "flow-commutator bracket of two lifts matches the lifted bracket field",
    ("poisson",),
    1e-2,
)
def _lie_bracket_flow(ctx):
    r2 = G.make_model("r2")
    eps = ctx.scenario.grid["flow_step"]
    f = G.poly2_observable({(2, 0): 0.5}, "xx/2")
    g = G.coordinate_observable(1, "y")
    path = P.circle_path(r2, ctx.path_grid(), center=(0.1, 0.2), radius=0.7)
    pts = path.points
    fwd = _rk4_flow(r2, g, "xy", _rk4_flow(r2, f, "xy", pts, eps), eps)
    back = _rk4_flow(r2, g, "xy", _rk4_flow(r2, f, "xy", fwd, -eps), -eps)
    fd_bracket = (back - pts) / eps**2
    target = P.hamiltonian_fields_along(r2, G.bracket_observable(r2, f, g), "xy", pts)
    worst = float(np.max(np.abs(fd_bracket - target)))
    return worst, 0.0, worst


# ---------------------------------------------------------------------------
# potential suite
# ---------------------------------------------------------------------------


@check(
    "beta_closed_form",
    "patch potential along a straight path matches the closed form",
    ("potential",),
    1e-12,
)
def _beta_closed(ctx):
    r2 = G.make_model("r2")
    line = P.line_path(r2, ctx.path_grid(), [0, 0], [1, 0])
    v = P.constant_variation(line, [0.0, 1.0])
    worst = abs(P.beta_eval(r2, None, line, v) - 0.5)
    zero = P.PathTangent(line, np.zeros_like(line.points))
    worst = max(worst, abs(P.beta_eval(r2, None, line, zero)))
    return worst, 0.0, worst


@check(
    "beta_partition_invariance",
    "splitting the interval with the same primitive leaves the potential unchanged",
    ("potential",),
    1e-13,
)
def _beta_partition(ctx):
    r2 = G.make_model("r2")
    line = P.line_path(r2, ctx.path_grid(), [0, 0], [1, 0])
    v = P.constant_variation(line, [0.0, 1.0])
    single = P.beta_eval(r2, None, line, v)
    parts = [
        P.PotentialPatch(0.0, 0.5, r2.theta_fn),
        P.PotentialPatch(0.5, 1.0, r2.theta_fn),
    ]
    split = P.beta_eval(r2, parts, line, v)
    return split, single, abs(split - single)


@check(
    "dbeta_vs_omega_plane",
    "exterior derivative of the patch potential reproduces the transgressed pairing",
    ("potential",),
    1e-5,
)
def _dbeta_plane(ctx):
    r2 = G.make_model("r2")
    h = ctx.scenario.grid["fd_step"]
    path = P.lissajous_path(r2, ctx.path_grid(), center=(0.1, 0.3), amplitude=(0.7, 0.5))
    worst = P.prop_dbeta_residual(r2, None, path, [1, 0], [0, 1], step=h)
    return worst, 0.0, worst


@check(
    "dbeta_vs_omega_two_segment",
    "the potential identity survives a two-segment partition of the interval",
    ("potential",),
    1e-5,
)
def _dbeta_two_segment(ctx):
    r2 = G.make_model("r2")
    h = ctx.scenario.grid["fd_step"]
    path = P.circle_path(r2, ctx.path_grid(), center=(0.2, 0.1), radius=0.8)
    parts = [
        P.PotentialPatch(0.0, 0.5, r2.theta_fn),
        P.PotentialPatch(0.5, 1.0, r2.theta_fn),
    ]
    worst = P.prop_dbeta_residual(r2, parts, path, [1, 0], [0, 1], step=h)
    return worst, 0.0, worst


@check(
    "dbeta_vs_omega_sphere",
    "the potential identity holds on the curved chart",
    ("potential",),
    1e-5,
)
def _dbeta_sphere(ctx):
    s2, paths = _test_paths_s2(ctx)
    h = ctx.scenario.grid["fd_step"]
    worst = 0.0
    for path in paths:
        worst = max(worst, P.prop_dbeta_residual(s2, None, path, [1, 0], [0, 1], step=h))
    return worst, 0.0, worst


# ---------------------------------------------------------------------------
# chen suite
# ---------------------------------------------------------------------------


@check(
    "chen_closed_forms",
    "first-order path integrals of plane forms match closed forms",
    ("chen",),
    1e-12,
)
def _chen_closed(ctx):
    r2 = G.make_model("r2")
    line = P.line_path(r2, ctx.path_grid(), [0, 0], [1, 0])
    v = P.constant_variation(line, [0.0, 1.0])
    om = T.omega_pform(r2)
    worst = abs(T.chen_first(om, line, v) - 1.0)
    worst = max(worst, abs(T.chen_first(T.coordinate_pform(0), line) - 1.0))
    worst = max(worst, abs(T.chen_truncated(om, line, T.TruncationPoint(0.5), v) - 0.5))
    worst = max(worst, abs(T.chen_truncated(om, line, T.TruncationPoint(0.0), v)))
    const = P.path_from_function(r2, "xy", ctx.path_grid(), lambda t: np.array([0.3, 0.4]))
    worst = max(worst, abs(T.chen_first(om, const, P.constant_variation(const, [0, 1]))))
    return worst, 0.0, worst


@check(
    "chen_truncation_additivity",
    "running integrals are additive across shared grid segments",
    ("chen",),
    1e-13,
)
def _chen_additivity(ctx):
    r2, paths = _test_paths_r2(ctx)
    path = paths[2]
    om = T.omega_pform(r2)
    t = path.grid.nodes
    v = P.PathTangent(path, np.stack([np.sin(2 * np.pi * t), np.cos(4 * np.pi * t)], axis=1))
    prefix = T.chen_prefix(om, path, v)
    i1 = path.grid.nearest_node(0.25)
    i2 = path.grid.nearest_node(0.75)
    integrand = om.values(path.chart_id, path.points, path.velocities(), v.vectors)
    from ._kernels import cumulative_simpson

    segment = cumulative_simpson(integrand[i1 : i2 + 1], path.grid.dt)[-1]
    worst = abs(prefix[i1] + segment - prefix[i2])
    worst = max(worst, abs(prefix[-1] - T.chen_first(om, path, v)))
    return worst, 0.0, worst


@check(
    "chen_stokes_plane",
    "truncated-integral differential matches the endpoint pullback difference (plane)",
    ("chen",),
    1e-6,
)
def _chen_stokes_r2(ctx):
    r2 = G.make_model("r2")
    h = ctx.scenario.grid["fd_step"]
    path = P.circle_path(r2, P.PathGrid(128), center=(0.1, -0.2), radius=0.8)
    worst = 0.0
    for t in (0.0, 0.5, 1.0):
        worst = max(
            worst,
            T.chen_stokes_residual(r2, T.omega_pform(r2), path, T.TruncationPoint(t), [1, 0], [0, 1], step=h),
        )
    return worst, 0.0, worst


@check(
    "chen_stokes_sphere",
    "truncated-integral differential matches the endpoint pullback difference (sphere)",
    ("chen",),
    1e-5,
)
def _chen_stokes_s2(ctx):
    s2, paths = _test_paths_s2(ctx)
    h = ctx.scenario.grid["fd_step"]
    worst = 0.0
    for t in (0.3, 0.7):
        worst = max(
            worst,
            T.chen_stokes_residual(
                s2, T.omega_pform(s2), paths[0], T.TruncationPoint(t), [1, 0], [0, 1], step=h
            ),
        )
    return worst, 0.0, worst


@check(
    "lambda_closed_form",
    "potential one-form value on a straight path matches the closed form",
    ("chen",),
    1e-12,
)
def _lambda_closed(ctx):
    r2 = G.make_model("r2")
    line = P.line_path(r2, ctx.path_grid(), [0, 0], [1, 0])
    worst = abs(T.lambda_eval(r2, line, P.constant_variation(line, [0, 1])) - 0.5)
    worst = max(worst, abs(T.lambda_eval(r2, line, P.PathTangent(line, line.velocities()))))
    const = P.path_from_function(r2, "xy", ctx.path_grid(), lambda t: np.array([0.5, -0.3]))
    worst = max(worst, abs(T.lambda_eval(r2, const, P.constant_variation(const, [1, 1]))))
    return worst, 0.0, worst


@check(
    "lambda_linearity",
    "potential one-form is linear in the field argument",
    ("chen",),
    1e-12,
)
def _lambda_linearity(ctx):
    r2, paths = _test_paths_r2(ctx)
    path = paths[1]
    a = ctx.rng.normal(size=path.points.shape)
    b = ctx.rng.normal(size=path.points.shape)
    c1, c2 = ctx.rng.normal(size=2)
    lhs = T.lambda_eval(r2, path, P.PathTangent(path, c1 * a + c2 * b))
    rhs = c1 * T.lambda_eval(r2, path, P.PathTangent(path, a)) + c2 * T.lambda_eval(
        r2, path, P.PathTangent(path, b)
    )
    worst = abs(lhs - rhs) / max(abs(rhs), 1e-12)
    return worst, 0.0, worst


@check(
    "lemma_decomposition_plane",
    "transgressed pairing = start-point pullback + d(potential) (flat case)",
    ("chen",),
    1e-8,
)
def _lemma_flat(ctx):
    r2, paths = _test_paths_r2(ctx)
    h = ctx.scenario.grid["fd_step"]
    worst = 0.0
    for path in paths:
        worst = max(worst, T.lemma_decomposition_residual(r2, path, [1, 0], [0, 1], step=h))
    return worst, 0.0, worst


@check(
    "lemma_decomposition_sphere",
    "transgressed pairing = start-point pullback + d(potential) (curved case)",
    ("chen",),
    1e-5,
)
def _lemma_sphere(ctx):
    s2, paths = _test_paths_s2(ctx)
    h = ctx.scenario.grid["fd_step"]
    worst = 0.0
    for path in paths:
        worst = max(worst, T.lemma_decomposition_residual(s2, path, [1, 0], [0, 1], step=h))
    return worst, 0.0, worst


@check(
    "lemma_decomposition_interval",
    "the decomposition holds on a rescaled interval with the scaled base form",
    ("chen",),
    1e-5,
)
def _lemma_interval(ctx):
    s2 = G.make_model("s2", radius=1.0)
    h = ctx.scenario.grid["fd_step"]
    grid = P.PathGrid(ctx.scenario.grid["n"], interval=(-1.0, 3.0))
    path = P.arc_path(s2, grid, phi_center=1.3, phi_amp=0.35, psi_start=1.5, psi_span=1.8)
    worst = T.lemma_decomposition_residual(s2, path, [1, 0], [0, 1], step=h)
    return worst, 0.0, worst


@check(
    "lemma_decomposition_slope",
    "decomposition residual decays at second order in the variation step",
    ("chen",),
    0.0,
)
def _lemma_slope(ctx):
    s2, paths = _test_paths_s2(ctx)
    # steps large enough that the quadratic truncation term dominates the
    # quadrature floor of the coarsest grids a scenario may choose
    steps = [3.2e-3, 1.6e-3, 8e-4]
    residuals = [
        T.lemma_decomposition_residual(s2, paths[0], [1, 0], [0, 1], step=h) for h in steps
    ]
    slope = np.polyfit(np.log(steps), np.log(residuals), 1)[0]
    return slope, 2.0, max(0.0, 1.7 - slope)


# ---------------------------------------------------------------------------
# holonomy suite
# ---------------------------------------------------------------------------


@check(
    "integrality_scenario",
    "total flux of the scenario model sits at an integer level",
    ("holonomy",),
    1e-6,
)
def _integrality_scenario(ctx):
    model = _scenario_model(ctx.scenario)
    cfg = Q.PrequantumConfig(ctx.scenario.hbar, model)
    grid = Q.ClosedSurfaceGrid(model)
    ratio = grid.total_flux() / (2.0 * np.pi * cfg.hbar)
    n, residual = Q.integrality_check(cfg, grid)
    return ratio, float(n), residual


@check(
    "integrality_torus",
    "unit-level torus flux is detected exactly",
    ("holonomy",),
    1e-10,
)
def _integrality_torus(ctx):
    t2 = G.make_model("t2", scale=1.0 / (2.0 * np.pi))
    cfg = Q.PrequantumConfig(1.0, t2)
    grid = Q.ClosedSurfaceGrid(t2)
    ratio = grid.total_flux() / (2.0 * np.pi * cfg.hbar)
    n, residual = Q.integrality_check(cfg, grid)
    return ratio, 1.0, residual + abs(n - 1)


def _circle_sweep_data(ctx, radius_fn=None, radius=0.9):
    r2 = G.make_model("r2")
    cfg = Q.PrequantumConfig(ctx.scenario.hbar, r2)
    grid = P.PathGrid(min(ctx.scenario.grid["n"], 128))
    loop = Q.sweep_circle_loop(
        r2, grid, s_count=ctx.scenario.grid["s_count"], radius=radius, radius_fn=radius_fn
    )
    return r2, cfg, loop


@check(
    "holonomy_unit_modulus",
    "holonomies from both formulas lie on the unit circle",
    ("holonomy",),
    1e-12,
)
def _holonomy_modulus(ctx):
    _, cfg, loop = _circle_sweep_data(ctx, radius_fn=lambda t: 0.6 + 0.3 * t * t * (3 - 2 * t))
    h1 = Q.holonomy_chart(cfg, loop)
    h2 = Q.holonomy_surface(cfg, Q.disk_surface(cfg.model, loop, ctx.scenario.grid["eps_count"]), loop)
    worst = max(abs(abs(h1) - 1.0), abs(abs(h2) - 1.0))
    return worst, 0.0, worst


@check(
    "holonomy_chart_closed_form",
    "constant circle sweep holonomy matches the enclosed-area phase",
    ("holonomy",),
    1e-6,
)
def _holonomy_closed_form(ctx):
    r = 0.9
    _, cfg, loop = _circle_sweep_data(ctx, radius=r)
    h = Q.holonomy_chart(cfg, loop)
    target = np.exp(1j * np.pi * r * r / cfg.hbar)
    worst = abs(np.angle(h * np.conj(target)))
    return worst, 0.0, worst


@check(
    "holonomy_chart_growing_radius",
    "square-root radius sweep holonomy matches its closed-form phase",
    ("holonomy",),
    1e-6,
)
def _holonomy_sqrt(ctx):
    r0 = 0.8
    _, cfg, loop = _circle_sweep_data(
        ctx, radius_fn=lambda t: r0 * np.sqrt(t) if t > 0 else 0.0
    )
    h = Q.holonomy_chart(cfg, loop)
    target = np.exp(1j * np.pi * r0 * r0 / (2.0 * cfg.hbar))
    worst = abs(np.angle(h * np.conj(target)))
    return worst, 0.0, worst


@check(
    "holonomy_chart_vs_surface",
    "potential line integrals and surface fluxes give the same holonomy",
    ("holonomy",),
    1e-6,
)
def _holonomy_chart_vs_surface(ctx):
    _, cfg, loop = _circle_sweep_data(ctx, radius_fn=lambda t: 0.6 + 0.3 * t * t * (3 - 2 * t))
    h1 = Q.holonomy_chart(cfg, loop)
    h2 = Q.holonomy_surface(cfg, Q.disk_surface(cfg.model, loop, ctx.scenario.grid["eps_count"]), loop)
    worst = abs(np.angle(h1 * np.conj(h2)))
    return worst, 0.0, worst


@check(
    "holonomy_degenerate_loop",
    "a loop collapsed to a point has trivial holonomy",
    ("holonomy",),
    1e-12,
)
def _holonomy_degenerate(ctx):
    r2 = G.make_model("r2")
    cfg = Q.PrequantumConfig(ctx.scenario.hbar, r2)
    grid = P.PathGrid(64)
    loop = Q.loop_from_function(r2, grid, 16, lambda s, t: np.array([0.3, 0.4]))
    h1 = Q.holonomy_chart(cfg, loop)
    surf = Q.surface_from_function(r2, grid, 16, 4, lambda s, e, t: np.array([0.3, 0.4]))
    h2 = Q.holonomy_surface(cfg, surf)
    worst = max(abs(h1 - 1.0), abs(h2 - 1.0))
    return worst, 0.0, worst


@check(
    "cap_complement_consistency",
    "two spanning caps differ exactly by the total-flux phase",
    ("holonomy",),
    1e-6,
)
def _cap_complement(ctx):
    s2 = G.make_model("s2", radius=1.0)
    cfg = Q.PrequantumConfig(ctx.scenario.hbar, s2)
    grid = P.PathGrid(64)
    loop = Q.latitude_sweep_loop(s2, grid, s_count=ctx.scenario.grid["s_count"], phi=1.1)
    h_n = Q.holonomy_surface(cfg, Q.cap_surface(s2, loop, 64, pole="north"), loop)
    h_s = Q.holonomy_surface(cfg, Q.cap_surface(s2, loop, 64, pole="south"), loop)
    total = Q.ClosedSurfaceGrid(s2).total_flux()
    predicted = np.exp(1j * total / cfg.hbar)
    measured = h_n * np.conj(h_s)
    worst = abs(np.angle(measured * np.conj(predicted)))
    return worst, 0.0, worst


@check(
    "lambda_line_cross_check",
    "loop line integral of the potential equals the truncated-flux formula",
    ("holonomy",),
    1e-8,
)
def _lambda_line_cross(ctx):
    _, cfg, loop = _circle_sweep_data(ctx, radius_fn=lambda t: 0.6 * (1.0 + 0.5 * t * t * (3 - 2 * t)))
    v1 = Q.lambda_line_integral(cfg, loop)
    v2 = Q.lambda_flux_form(cfg, loop)
    return v1, v2, abs(v1 - v2)


@check(
    "lambda_line_zero_cases",
    "constant sweeps and zero-area loops have vanishing potential line integrals",
    ("holonomy",),
    1e-10,
)
def _lambda_line_zero(ctx):
    r2, cfg, loop = _circle_sweep_data(ctx, radius=0.9)
    worst = abs(Q.lambda_line_integral(cfg, loop))
    grid = P.PathGrid(64)
    flat_loop = Q.loop_from_function(
        r2, grid, 32,
        lambda s, t: np.array([0.2 + (1.0 + 0.5 * t) * np.sin(2 * np.pi * s), -0.1]),
    )
    worst = max(worst, abs(Q.lambda_line_integral(cfg, flat_loop)))
    worst = max(worst, abs(Q.lambda_flux_form(cfg, flat_loop)))
    return worst, 0.0, worst


# ---------------------------------------------------------------------------
# operators suite
# ---------------------------------------------------------------------------


@check(
    "curvature_plane",
    "connection commutator reproduces the transgressed pairing (flat case)",
    ("operators",),
    1e-6,
)
def _curvature_plane(ctx):
    r2 = G.make_model("r2")
    cfg = Q.PrequantumConfig(ctx.scenario.hbar, r2)
    path = P.circle_path(r2, P.PathGrid(128), center=(0.2, 0.1), radius=0.7)
    worst = Q.curvature_residual(cfg, path, [1, 0], [0, 1], step=ctx.scenario.grid["fd_step"])
    return worst, 0.0, worst


@check(
    "curvature_sphere",
    "connection commutator reproduces the transgressed pairing (curved case)",
    ("operators",),
    1e-5,
)
def _curvature_sphere(ctx):
    s2, paths = _test_paths_s2(ctx)
    cfg = Q.PrequantumConfig(ctx.scenario.hbar, s2)
    worst = 0.0
    for path in paths:
        worst = max(
            worst, Q.curvature_residual(cfg, path, [1, 0], [0, 1], step=ctx.scenario.grid["fd_step"])
        )
    return worst, 0.0, worst


@check(
    "covariant_closed_forms",
    "covariant derivatives and their pullbacks match term-by-term closed forms",
    ("operators",),
    1e-10,
)
def _covariant_closed(ctx):
    r2 = G.make_model("r2")
    cfg = Q.PrequantumConfig(1.0, r2)
    one = Q.constant_section(1.0)
    sx = Q.poly2_section({(1, 0): 1.0}, "x")
    p = np.array([2.0, 0.0])
    worst = abs(
        Q.covariant_derivative(cfg, one, p, G.PointVector("xy", p, [0.0, 1.0])) - (-2.0j)
    )
    p0 = np.array([0.0, 0.0])
    worst = max(
        worst,
        abs(Q.covariant_derivative(cfg, sx, p0, G.PointVector("xy", p0, [1.0, 0.0])) - 1.0),
    )
    worst = max(
        worst, abs(Q.covariant_derivative(cfg, one, p, G.PointVector("xy", p, [0.0, 0.0])))
    )
    grid = ctx.path_grid(64)
    line = P.line_path(r2, grid, [0, 0], [1, 0])
    worst = max(
        worst,
        abs(
            Q.pullback_covariant_derivative(cfg, one, line, P.constant_variation(line, [0, 1]))
            - (-0.5j)
        ),
    )
    worst = max(
        worst,
        abs(
            Q.pullback_covariant_derivative(cfg, sx, line, P.constant_variation(line, [1, 0]))
            - 1.0
        ),
    )
    return worst, 0.0, worst


@check(
    "operator_closed_forms",
    "operator action on the unit section matches closed forms",
    ("operators",),
    1e-12,
)
def _operator_closed(ctx):
    r2 = G.make_model("r2")
    cfg = Q.PrequantumConfig(1.0, r2)
    one = Q.constant_section(1.0)
    x = G.coordinate_observable(0, "x")
    line = P.line_path(r2, ctx.path_grid(64), [0, 0], [1, 0])
    worst = abs(Q.apply_operator(cfg, P.tilde_observable(x), one, line))
    sec = Q.poly2_section({(0, 0): 0.4, (1, 0): 1.0}, "s")
    worst = max(
        worst,
        abs(
            Q.apply_operator(cfg, P.path_constant(2.5), sec, line)
            - 2.5 * sec.value("xy", line.points[0])
        ),
    )
    return worst, 0.0, worst


@check(
    "operator_product_expansion",
    "five-term product expansion agrees with the generic operator action",
    ("operators",),
    1e-8,
)
def _operator_five_term(ctx):
    r2 = G.make_model("r2")
    cfg = Q.PrequantumConfig(ctx.scenario.hbar, r2)
    x = G.coordinate_observable(0, "x")
    y = G.coordinate_observable(1, "y")
    sec = Q.poly2_section({(0, 0): 1.0, (1, 0): 0.5, (0, 1): -0.3j}, "s")
    worst = 0.0
    _, paths = _test_paths_r2(ctx, n=128)
    for path in paths:
        a = Q.apply_operator(cfg, P.path_product(x, y), sec, path)
        b = Q.apply_operator_product(cfg, x, y, sec, path)
        worst = max(worst, abs(a - b) / max(abs(b), 1e-12))
    return worst, 0.0, worst


@check(
    "operator_linearity",
    "operator action is linear in the section and in the observable",
    ("operators",),
    1e-12,
)
def _operator_linearity(ctx):
    r2 = G.make_model("r2")
    cfg = Q.PrequantumConfig(ctx.scenario.hbar, r2)
    x = G.coordinate_observable(0, "x")
    y = G.coordinate_observable(1, "y")
    path = P.circle_path(r2, ctx.path_grid(64), center=(0.1, 0.2), radius=0.6)
    s1 = Q.poly2_section({(1, 0): 1.0}, "s1")
    s2 = Q.poly2_section({(0, 1): 1.0 + 0.5j}, "s2")
    a, b = complex(ctx.rng.normal(), ctx.rng.normal()), complex(ctx.rng.normal())
    phi = P.tilde_observable(x)
    combo = Q.Section(
        "combo",
        lambda chart, pts: a * s1.eval_fn(chart, pts) + b * s2.eval_fn(chart, pts),
        lambda chart, pts: a * s1.grad_fn(chart, pts) + b * s2.grad_fn(chart, pts),
    )
    lhs = Q.apply_operator(cfg, phi, combo, path)
    rhs = a * Q.apply_operator(cfg, phi, s1, path) + b * Q.apply_operator(cfg, phi, s2, path)
    worst = abs(lhs - rhs) / max(abs(rhs), 1e-12)
    phi2 = P.tilde_observable(y)
    c1, c2 = ctx.rng.normal(size=2)
    mixed = P.PathObservable(((c1, ((x, 1),)), (c2, ((y, 1),))))
    lhs2 = Q.apply_operator(cfg, mixed, s1, path)
    rhs2 = c1 * Q.apply_operator(cfg, phi, s1, path) + c2 * Q.apply_operator(cfg, phi2, s1, path)
    worst = max(worst, abs(lhs2 - rhs2) / max(abs(rhs2), 1e-12))
    return worst, 0.0, worst


@check(
    "commutator_coordinates",
    "operator commutator of the coordinate lifts matches the bracket operator",
    ("operators",),
    1e-4,
)
def _commutator_xy(ctx):
    r2 = G.make_model("r2")
    cfg = Q.PrequantumConfig(ctx.scenario.hbar, r2)
    one = Q.constant_section(1.0)
    x = G.coordinate_observable(0, "x")
    y = G.coordinate_observable(1, "y")
    path = P.circle_path(r2, ctx.path_grid(128), center=(0.2, 0.1), radius=0.7)
    worst = Q.commutator_residual(
        cfg, P.tilde_observable(x), P.tilde_observable(y), one, path,
        step=ctx.scenario.grid["op_step"],
    )
    return worst, 0.0, worst


@check(
    "commutator_degenerate_cases",
    "self- and constant-commutators vanish",
    ("operators",),
    1e-12,
)
def _commutator_trivial(ctx):
    r2 = G.make_model("r2")
    cfg = Q.PrequantumConfig(ctx.scenario.hbar, r2)
    one = Q.constant_section(1.0)
    x = G.coordinate_observable(0, "x")
    xt = P.tilde_observable(x)
    path = P.circle_path(r2, ctx.path_grid(64), center=(0.2, 0.1), radius=0.7)
    worst = Q.commutator_residual(cfg, xt, xt, one, path, step=ctx.scenario.grid["op_step"])
    worst = max(
        worst,
        Q.commutator_residual(
            cfg, xt, P.path_constant(3.0), one, path, step=ctx.scenario.grid["op_step"]
        ),
    )
    return worst, 0.0, worst


@check(
    "commutator_nonlinear",
    "commutator law holds for a quadratic observable against a coordinate lift",
    ("operators",),
    1e-4,
)
def _commutator_nonlinear(ctx):
    r2 = G.make_model("r2")
    cfg = Q.PrequantumConfig(ctx.scenario.hbar, r2)
    # non-polynomial section so the commutator step refinement is observable
    sec = Q.Section(
        "exp",
        lambda chart, pts: np.exp(0.9 * pts[:, 0] + 0.4 * pts[:, 1]).astype(complex),
        lambda chart, pts: np.stack(
            [0.9 * np.exp(0.9 * pts[:, 0] + 0.4 * pts[:, 1]),
             0.4 * np.exp(0.9 * pts[:, 0] + 0.4 * pts[:, 1])], axis=1
        ).astype(complex),
    )
    xsq = G.poly2_observable({(2, 0): 0.5}, "xx/2")
    y = G.coordinate_observable(1, "y")
    path = P.circle_path(r2, ctx.path_grid(128), center=(0.2, 0.1), radius=0.7)
    worst = Q.commutator_residual(
        cfg, P.tilde_observable(xsq), P.tilde_observable(y), sec, path,
        step=ctx.scenario.grid["op_step"],
    )
    return worst, 0.0, worst


@check(
    "inner_product_torus",
    "unit-section pairing on the unit-level torus equals the total area",
    ("operators",),
    1e-10,
)
def _inner_torus(ctx):
    t2 = G.make_model("t2", scale=1.0 / (2.0 * np.pi))
    cfg = Q.PrequantumConfig(1.0, t2)
    one = Q.constant_section(1.0)
    val = Q.inner_product(cfg, one, one)
    target = 2.0 * np.pi
    return val.real, target, abs(val - target)


@check(
    "inner_product_hermitian",
    "section pairing is conjugate-symmetric and positive on nonzero sections",
    ("operators",),
    1e-12,
)
def _inner_hermitian(ctx):
    t2 = G.make_model("t2", scale=1.0 / (2.0 * np.pi))
    cfg = Q.PrequantumConfig(1.0, t2)
    worst = 0.0
    for _ in range(3):
        c1 = {k: complex(ctx.rng.normal(), ctx.rng.normal()) for k in [(0, 0), (1, 0), (0, 2)]}
        c2 = {k: complex(ctx.rng.normal(), ctx.rng.normal()) for k in [(0, 1), (2, 0)]}
        s1, s2 = Q.poly2_section(c1), Q.poly2_section(c2)
        ip12 = Q.inner_product(cfg, s1, s2)
        ip21 = Q.inner_product(cfg, s2, s1)
        worst = max(worst, abs(ip12 - np.conj(ip21)) / max(abs(ip12), 1e-12))
        norm = Q.inner_product(cfg, s1, s1)
        if not norm.real > 0:
            worst = max(worst, 1.0)
        worst = max(worst, abs(Q.inner_product(cfg, s1, Q.constant_section(0.0))))
    return worst, 0.0, worst


# ---------------------------------------------------------------------------
# kg suite
# ---------------------------------------------------------------------------


def _kg_cfg(ctx, sign="paper_literal"):
    return KG.SpacetimeConfig(
        lx=2.0 * np.pi, rho=2.0, radius=1.0, theta_metric_sign=sign, kcut=4, ncut=1
    )


def _kg_surface(ctx, t0=0.0):
    return KG.CauchySurfaceSpec(
        t0=t0, nx=ctx.scenario.grid["nx"], ntheta=ctx.scenario.grid["ntheta"]
    )


@check(
    "kg_dispersion_residual",
    "mode expansions satisfy the wave equation to analytic precision",
    ("kg",),
    1e-12,
)
def _kg_dispersion(ctx):
    worst = 0.0
    for sign in ("paper_literal", "spacelike"):
        cfg = _kg_cfg(ctx, sign)
        worst = max(worst, KG.kg_residual(cfg, KG.single_mode(cfg, k=1)))
        sol = KG.random_bar_solution(cfg, 5, ctx.rng)
        worst = max(worst, KG.kg_residual(cfg, sol))
    return worst, 0.0, worst


@check(
    "kg_dispersion_detector",
    "a corrupted frequency is flagged by the wave-equation residual",
    ("kg",),
    0.0,
)
def _kg_detector(ctx):
    cfg = _kg_cfg(ctx)
    bad = KG.scaled_omega(KG.single_mode(cfg, k=1), 1.1)
    value = KG.kg_residual(cfg, bad)
    return value, 0.1, max(0.0, 0.1 - value)


@check(
    "pairing_base_closed_form",
    "single-mode base pairing matches its closed form",
    ("kg",),
    1e-10,
)
def _omega_m_closed(ctx):
    cfg = KG.SpacetimeConfig(lx=2.0 * np.pi, rho=1.0, radius=1.0, kcut=4, ncut=1)
    surf = _kg_surface(ctx)
    val = KG.omega_m(cfg, KG.single_mode(cfg, k=1, a=1.0), KG.single_mode(cfg, k=1, b=1.0), surf)
    target = np.sqrt(2.0) * np.pi
    return val, target, abs(val - target) / target


@check(
    "pairing_base_structure",
    "base pairing is antisymmetric, bilinear, and kills distinct modes",
    ("kg",),
    1e-12,
)
def _omega_m_structure(ctx):
    cfg = _kg_cfg(ctx)
    surf = _kg_surface(ctx)
    m1 = KG.single_mode(cfg, k=1, a=0.7, b=-0.2)
    m2 = KG.single_mode(cfg, k=2, a=0.4, b=0.8)
    worst = abs(KG.omega_m(cfg, m1, m1, surf))
    worst = max(worst, abs(KG.omega_m(cfg, m1, m2, surf)))
    mixed = KG.ModeSolution(cfg, [(1, 0.7, -0.2), (3, 0.5, 0.1)])
    other = KG.ModeSolution(cfg, [(1, -0.1, 0.9), (3, 0.3, -0.6)])
    lhs = KG.omega_m(cfg, mixed, other, surf)
    worst = max(worst, abs(lhs + KG.omega_m(cfg, other, mixed, surf)))
    return worst, 0.0, worst


@check(
    "pairing_base_surface_independence",
    "base pairing is independent of the Cauchy time",
    ("kg",),
    1e-8,
)
def _omega_m_cauchy(ctx):
    cfg = _kg_cfg(ctx)
    m1 = KG.ModeSolution(cfg, [(1, 0.7, -0.2), (2, 0.5, 0.1)])
    m2 = KG.ModeSolution(cfg, [(1, -0.1, 0.9), (2, 0.3, -0.6)])
    vals = [KG.omega_m(cfg, m1, m2, _kg_surface(ctx, t0)) for t0 in (0.0, 0.3, 0.7)]
    worst = max(abs(v - vals[0]) for v in vals[1:]) / max(abs(vals[0]), 1e-12)
    return worst, 0.0, worst


@check(
    "pairing_bar_closed_form",
    "single-mode product-surface pairing matches its closed form",
    ("kg",),
    1e-10,
)
def _omega_bar_closed(ctx):
    cfg = _kg_cfg(ctx)
    surf = _kg_surface(ctx)
    val = KG.omega_bar(
        cfg, KG.single_bar_mode(cfg, 1, 1, a=1.0), KG.single_bar_mode(cfg, 1, 1, b=1.0), surf
    )
    omega = np.sqrt(cfg.omega_sq(1, 1))
    target = omega * cfg.lx / 2.0 * 2.0 * np.pi * cfg.radius
    return val, target, abs(val - target) / target


@check(
    "pairing_bar_surface_independence",
    "product-surface pairing is independent of the Cauchy time",
    ("kg",),
    1e-8,
)
def _omega_bar_cauchy(ctx):
    cfg = _kg_cfg(ctx)
    rng = np.random.default_rng([ctx.scenario.seed, 77])
    s1, s2 = KG.random_bar_pair(cfg, 4, rng)
    vals = [KG.omega_bar(cfg, s1, s2, _kg_surface(ctx, t0)) for t0 in (0.0, 0.3, 0.7)]
    worst = max(abs(v - vals[0]) for v in vals[1:]) / max(abs(vals[0]), 1e-12)
    return worst, 0.0, worst


@check(
    "embedding_roundtrip",
    "embedded slices reproduce the compactified field at the matching angles",
    ("kg",),
    1e-12,
)
def _embedding_roundtrip(ctx):
    cfg = _kg_cfg(ctx)
    grid = P.PathGrid(64)
    sol = KG.random_bar_solution(cfg, 4, ctx.rng)
    emb = KG.embed_bar_solution(cfg, sol, grid)
    xs = _kg_surface(ctx).x_nodes(cfg)
    worst = 0.0
    for j in (0, 17, 40, 64):
        f_slice, d_slice = emb.slice_field_and_dt(j, xs, 0.45)
        f_dir, d_dir = sol.field_and_dt(xs, np.array([2.0 * np.pi * grid.nodes[j]]), 0.45)
        worst = max(worst, float(np.max(np.abs(f_slice - f_dir[:, 0]))))
        worst = max(worst, float(np.max(np.abs(d_slice - d_dir[:, 0]))))
    n0 = KG.BarModeSolution(cfg, [(1, 0, 0.5, 0.4)])
    emb0 = KG.embed_bar_solution(cfg, n0, grid)
    f0, _ = emb0.slice_field_and_dt(0, xs, 0.2)
    f1, _ = emb0.slice_field_and_dt(32, xs, 0.2)
    worst = max(worst, float(np.max(np.abs(f0 - f1))))
    return worst, 0.0, worst


@check(
    "coincidence_zero_modes",
    "pure circle-independent pairs reduce to the scaled base pairing",
    ("kg",),
    1e-10,
)
def _coincidence_n0(ctx):
    cfg = _kg_cfg(ctx)
    surf = _kg_surface(ctx)
    grid = ctx.path_grid(128)
    b1 = KG.BarModeSolution(cfg, [(1, 0, 0.7, -0.2), (2, 0, 0.1, 0.4)])
    b2 = KG.BarModeSolution(cfg, [(1, 0, -0.3, 0.9), (3, 0, 0.5, 0.0)])
    ot = KG.omega_tilde_solutions(cfg, b1, b2, surf, grid)
    m1 = KG.ModeSolution(cfg, [(1, 0.7, -0.2), (2, 0.1, 0.4)])
    m2 = KG.ModeSolution(cfg, [(1, -0.3, 0.9), (3, 0.5, 0.0)])
    target = 2.0 * np.pi * cfg.radius * KG.omega_m(cfg, m1, m2, surf)
    worst = abs(ot - target) / max(abs(target), 1e-12)
    worst = max(worst, KG.prop_coincidence_residual(cfg, b1, b1, surf, grid))
    return worst, 0.0, worst


@check(
    "coincidence_random_mixtures",
    "path-space and product-surface pairings coincide on random mixtures",
    ("kg",),
    1e-6,
)
def _coincidence_random(ctx):
    surf = _kg_surface(ctx)
    grid = ctx.path_grid(128)
    draws = ctx.scenario.random["kg_draws"]
    modes = ctx.scenario.random["kg_modes"]
    worst = 0.0
    for sign in ("paper_literal", "spacelike"):
        cfg = _kg_cfg(ctx, sign)
        for _ in range(draws):
            s1, s2 = KG.random_bar_pair(cfg, modes, ctx.rng)
            worst = max(worst, KG.prop_coincidence_residual(cfg, s1, s2, surf, grid))
    return worst, 0.0, worst


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------


def list_suites():
    return SUITE_NAMES + ("all",)


def checks_for_suite(suite):
    if suite == "all":
        return list(_REGISTRY)
    if suite not in SUITE_NAMES:
        raise SuiteUnknownError(
            f"unknown suite {suite!r}; available: {', '.join(list_suites())}"
        )
    return [c for c in _REGISTRY if suite in c["suites"]]


def _run_one(check_def, scenario):
    rng = np.random.default_rng([scenario.seed, zlib.crc32(check_def["id"].encode())])
    ctx = CheckContext(scenario=scenario, rng=rng)
    tol = scenario.tolerance(check_def["id"], check_def["tolerance"])
    start = time.perf_counter()
    try:
        value, reference, residual = check_def["fn"](ctx)
        error = ""
    except PathquantError as exc:  # per-check failures never abort the suite
        value, reference, residual = float("nan"), float("nan"), float("inf")
        error = f"{type(exc).__name__}: {exc}"
    elapsed = (time.perf_counter() - start) * 1000.0
    return CheckRecord(
        check_id=check_def["id"],
        claim=check_def["claim"],
        value=float(value),
        reference=float(reference),
        residual=float(residual),
        tolerance=tol,
        passed=bool(residual <= tol),
        runtime_ms=elapsed,
        error=error,
    )


def run_suite(scenario, out_path=None):
    """Run the named suite and return (and optionally write) the report."""
    checks = checks_for_suite(scenario.suite)
    start = time.perf_counter()
    workers = int(os.environ.get("PATHQUANT_THREADS", "1"))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda c: _run_one(c, scenario), checks))
    else:
        records = [_run_one(c, scenario) for c in checks]
    report = ResidualReport(
        suite=scenario.suite,
        scenario=scenario.echo(),
        records=records,
        timestamp=time.strftime("%Y-%m-%dT%H:%M:%S"),
        total_ms=(time.perf_counter() - start) * 1000.0,
    )
    target = out_path or scenario.output
    if target:
        report.write_json(target)
    return report


def convergence_sweep(scenario, parameter, levels):
    """Rerun the suite at geometrically refined N or h and fit residual slopes.

    Returns {check_id: {"levels": [...], "residuals": [...], "slope": float|"floor"}}.
    For N the parameter doubles per level; for h it halves.
    """
    if levels < 3:
        raise SuiteUnknownError("convergence sweeps need at least 3 levels")
    if parameter not in ("N", "h"):
        raise SuiteUnknownError("sweep parameter must be 'N' or 'h'")
    values = []
    reports = []
    for level in range(levels):
        if parameter == "N":
            n = scenario.grid["n"] * 2**level
            sc = scenario.with_grid(n=n)
            values.append(float(n))
        else:
            h = scenario.grid["fd_step"] / 2**level
            sc = scenario.with_grid(fd_step=h, op_step=h)
            values.append(h)
        reports.append(run_suite(sc))
    table = {}
    for idx, record in enumerate(reports[0].sorted_records()):
        cid = record.check_id
        residuals = [rep.sorted_records()[idx].residual for rep in reports]
        entry = {"levels": list(values), "residuals": residuals}
        finite = [r for r in residuals if np.isfinite(r) and r > 0]
        if max(residuals) < 1e-11:
            entry["slope"] = "floor"
        elif len(finite) == len(residuals):
            slope = np.polyfit(np.log(values), np.log(residuals), 1)[0]
            # report the observed order p with residual ~ N^-p or ~ h^p
            entry["slope"] = float(-slope if parameter == "N" else slope)
        else:
            entry["slope"] = "undefined"
        table[cid] = entry
    return table

"""Base-model pairing, Hamiltonian fields, and bracket identities."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathquant import geometry as G
from pathquant.errors import ChartDomainError, DegenerateFormError, DimensionError

finite = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False, allow_infinity=False)


def vec(r2, p, components):
    return G.PointVector("xy", np.asarray(p, dtype=float), components)


def test_eval_omega_canonical_pairing(r2):
    p = np.array([0.0, 0.0])
    assert G.eval_omega(r2, p, vec(r2, p, [1, 0]), vec(r2, p, [0, 1])) == 1.0


def test_eval_omega_same_vector_is_exactly_zero(r2, rng):
    p = rng.uniform(-2, 2, size=2)
    u = vec(r2, p, rng.normal(size=2))
    assert G.eval_omega(r2, p, u, u) == 0.0


def test_eval_omega_sphere_equator(s2):
    # area form r^2 sin(phi) at the equator; psi placed mid-chart
    p = np.array([np.pi / 2.0, np.pi])
    u = G.PointVector("spherical", p, [1.0, 0.0])
    v = G.PointVector("spherical", p, [0.0, 1.0])
    assert abs(G.eval_omega(s2, p, u, v) - 1.0) < 1e-15


@settings(max_examples=50, deadline=None)
@given(finite, finite, finite, finite)
def test_eval_omega_antisymmetry_exact(u0, u1, v0, v1):
    r2 = G.make_model("r2")
    p = np.array([0.3, -0.4])
    u = G.PointVector("xy", p, [u0, u1])
    v = G.PointVector("xy", p, [v0, v1])
    assert G.eval_omega(r2, p, u, v) == -G.eval_omega(r2, p, v, u)


@settings(max_examples=50, deadline=None)
@given(finite, finite)
def test_eval_omega_bilinear(a, b):
    s2 = G.make_model("s2", radius=1.3)
    p = np.array([1.1, 2.0])
    rng = np.random.default_rng(7)
    u1, u2, w = (rng.normal(size=2) for _ in range(3))
    combo = G.PointVector("spherical", p, a * u1 + b * u2)
    lhs = G.eval_omega(s2, p, combo, G.PointVector("spherical", p, w))
    rhs = a * G.eval_omega(s2, p, G.PointVector("spherical", p, u1), G.PointVector("spherical", p, w))
    rhs += b * G.eval_omega(s2, p, G.PointVector("spherical", p, u2), G.PointVector("spherical", p, w))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_eval_omega_domain_and_dimension_errors(r2, s2):
    p = np.array([0.01, 1.0])  # inside the phi margin? phi=0.01 < delta+margin
    u = G.PointVector("spherical", p, [1.0, 0.0])
    v = G.PointVector("spherical", p, [0.0, 1.0])
    with pytest.raises(ChartDomainError):
        G.eval_omega(s2, p, u, v)
    q = np.array([0.0, 0.0])
    w3 = G.PointVector("xy", np.zeros(3), np.ones(3))
    with pytest.raises(DimensionError):
        G.eval_omega(r2, q, w3, w3)


def test_point_vector_shape_mismatch():
    with pytest.raises(DimensionError):
        G.PointVector("xy", np.zeros(2), np.zeros(3))


def test_hamiltonian_field_coordinates(r2, coord_x, coord_y):
    p = np.array([0.3, 0.7])
    assert np.allclose(G.hamiltonian_vector_field(r2, coord_x, "xy", p).components, [0.0, 1.0], atol=1e-14)
    assert np.allclose(G.hamiltonian_vector_field(r2, coord_y, "xy", p).components, [-1.0, 0.0], atol=1e-14)
    const = G.constant_observable(4.2)
    assert np.allclose(G.hamiltonian_vector_field(r2, const, "xy", p).components, 0.0)


def test_hamiltonian_field_contraction_residual(r2, s2, rng):
    for model, chart, lo, hi in (
        (r2, "xy", [-2, -2], [2, 2]),
        (s2, "spherical", [0.4, 0.5], [2.7, 5.8]),
    ):
        for _ in range(8):
            f = G.random_poly2(rng)
            p = rng.uniform(lo, hi)
            x = G.hamiltonian_vector_field(model, f, chart, p)
            w = model.omega(chart, p)[0]
            df = f.gradients(chart, p[None, :])[0]
            assert np.max(np.abs(w.T @ x.components + df)) <= 1e-12 * max(np.max(np.abs(df)), 1.0)


def test_hamiltonian_field_fd_gradient_second_order(r2, rng):
    f_plain = G.Observable("exp", lambda chart, pts: np.exp(pts[:, 0]) * np.sin(pts[:, 1]))
    f_exact = G.Observable(
        "exp",
        lambda chart, pts: np.exp(pts[:, 0]) * np.sin(pts[:, 1]),
        lambda chart, pts: np.stack(
            [np.exp(pts[:, 0]) * np.sin(pts[:, 1]), np.exp(pts[:, 0]) * np.cos(pts[:, 1])], axis=1
        ),
    )
    p = np.array([0.4, 0.9])
    exact = G.hamiltonian_vector_field(r2, f_exact, "xy", p).components
    errs = []
    steps = [1e-3, 5e-4, 2.5e-4]
    for h in steps:
        approx = G.hamiltonian_vector_field(r2, f_plain, "xy", p, fd_step=h).components
        errs.append(np.max(np.abs(approx - exact)))
    ratios = [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]
    # second order: error ratio ~4 under step halving, stable across levels
    assert all(3.0 < r < 5.0 for r in ratios)


def test_degenerate_form_raises():
    box = G.ChartBox("c", np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    degenerate = G.SymplecticModel(
        name="degenerate",
        dim=2,
        charts={"c": box},
        omega_fn=lambda chart, pts: np.zeros((pts.shape[0], 2, 2)),
    )
    f = G.coordinate_observable(0)
    with pytest.raises(DegenerateFormError):
        G.hamiltonian_vector_field(degenerate, f, "c", np.array([0.0, 0.0]))


def test_poisson_bracket_examples(r2, coord_x, coord_y):
    p = np.array([2.0, 3.0])
    assert abs(G.poisson_bracket(r2, coord_x, coord_y, "xy", p) - 1.0) < 1e-14
    assert G.poisson_bracket(r2, coord_x, coord_x, "xy", p) == 0.0
    half_x_sq = G.poly2_observable({(2, 0): 0.5})
    assert abs(G.poisson_bracket(r2, half_x_sq, coord_y, "xy", p) - 2.0) < 1e-13


def test_poisson_bracket_cross_formula(r2, s2, rng):
    # w(X_f, X_g) against the contraction form dg(X_f)
    for model, chart, lo, hi in (
        (r2, "xy", [-1.5, -1.5], [1.5, 1.5]),
        (s2, "spherical", [0.5, 0.8], [2.5, 5.5]),
    ):
        for _ in range(5):
            f, g = G.random_poly2(rng), G.random_poly2(rng)
            p = rng.uniform(lo, hi)
            lhs = G.poisson_bracket(model, f, g, chart, p)
            xf = G.hamiltonian_vector_field(model, f, chart, p).components
            dg = g.gradients(chart, p[None, :])[0]
            rhs = float(np.dot(dg, xf))
            assert abs(lhs - rhs) <= 1e-10 * max(abs(rhs), 1.0)


def test_jacobi_identity_fd_inner_brackets(r2, rng):
    worst = []
    for step in (2e-5, 1e-5):
        level_worst = 0.0
        for _ in range(4):
            f = G.random_poly2(rng, max_degree=3)
            g = G.random_poly2(rng, max_degree=3)
            h = G.random_poly2(rng, max_degree=3)
            p = rng.uniform(-1.5, 1.5, size=2)
            total = 0.0
            for a, b, c in ((f, g, h), (g, h, f), (h, f, g)):
                inner = G.bracket_observable(r2, b, c)
                xa = G.hamiltonian_vector_field(r2, a, "xy", p).components
                d_inner = G.fd_gradient(inner, "xy", p[None, :], step_scale=step)[0]
                total += float(np.dot(d_inner, xa))
            level_worst = max(level_worst, abs(total))
        worst.append(level_worst)
    assert max(worst) < 1e-6
    # Richardson sanity: halving the step must not blow the defect up
    assert worst[1] < 10.0 * worst[0] + 1e-9


def test_leibniz_rule_analytic_gradients(r2, rng):
    for _ in range(6):
        f, g, h = (G.random_poly2(rng) for _ in range(3))
        p = rng.uniform(-1.5, 1.5, size=2)
        fg = G.observable_product(f, g)
        lhs = G.poisson_bracket(r2, fg, h, "xy", p)
        rhs = f.value("xy", p) * G.poisson_bracket(r2, g, h, "xy", p)
        rhs += g.value("xy", p) * G.poisson_bracket(r2, f, h, "xy", p)
        assert abs(lhs - rhs) <= 1e-8 * max(abs(rhs), 1.0)


def test_theta_is_a_potential_for_omega(r2, s2, t2_unit_level, rng):
    # central-difference exterior derivative of theta matches the area component
    h = 1e-5
    for model, chart, lo, hi in (
        (r2, "xy", [-2, -2], [2, 2]),
        (s2, "spherical", [0.4, 0.5], [2.7, 5.8]),
        (t2_unit_level, "angles", [0.5, 0.5], [5.5, 5.5]),
    ):
        for _ in range(5):
            p = rng.uniform(lo, hi)
            d01 = (
                model.theta(chart, p[None, :] + [[h, 0.0]])[0, 1]
                - model.theta(chart, p[None, :] - [[h, 0.0]])[0, 1]
            ) / (2 * h)
            d10 = (
                model.theta(chart, p[None, :] + [[0.0, h]])[0, 0]
                - model.theta(chart, p[None, :] - [[0.0, h]])[0, 0]
            ) / (2 * h)
            omega01 = model.omega(chart, p)[0, 0, 1]
            assert abs((d01 - d10) - omega01) < 1e-8


def test_observable_fd_gradient_richardson_consistency(rng):
    obs = G.Observable("mix", lambda chart, pts: np.sin(pts[:, 0]) * np.exp(0.5 * pts[:, 1]))
    pts = rng.uniform(-1, 1, size=(6, 2))
    g1 = G.fd_gradient(obs, "xy", pts, step_scale=2e-5)
    g2 = G.fd_gradient(obs, "xy", pts, step_scale=1e-5)
    # both second-order accurate: difference is at the truncation scale
    assert np.max(np.abs(g1 - g2)) < 1e-8


def test_make_model_rejects_unknown():
    with pytest.raises(ChartDomainError):
        G.make_model("k3")

"""Integrality, connection, holonomy, operators, and the section pairing."""

import numpy as np
import pytest

from pathquant import geometry as G
from pathquant import paths as P
from pathquant import prequantum as Q
from pathquant.errors import (
    BoundaryMismatchError,
    ChartDomainError,
    DimensionError,
    NonCompactDomainError,
)


@pytest.fixture
def cfg_r2(r2):
    return Q.PrequantumConfig(1.0, r2)


@pytest.fixture
def cfg_s2(s2):
    return Q.PrequantumConfig(1.0, s2)


def test_config_requires_positive_hbar(r2):
    with pytest.raises(DimensionError):
        Q.PrequantumConfig(0.0, r2)


# -- integrality -------------------------------------------------------------


def test_integrality_sphere(cfg_s2, s2):
    n, residual = Q.integrality_check(cfg_s2, Q.ClosedSurfaceGrid(s2))
    assert n == 2 and residual < 1e-6


def test_integrality_torus(t2_unit_level):
    cfg = Q.PrequantumConfig(1.0, t2_unit_level)
    n, residual = Q.integrality_check(cfg, Q.ClosedSurfaceGrid(t2_unit_level))
    assert n == 1 and residual < 1e-10


def test_integrality_flags_bad_hbar(s2):
    cfg = Q.PrequantumConfig(0.7, s2)
    n, residual = Q.integrality_check(cfg, Q.ClosedSurfaceGrid(s2))
    assert n == 3
    assert abs(residual - 1.0 / 7.0) < 1e-6


def test_closed_surface_needs_compact_model(r2):
    with pytest.raises(NonCompactDomainError):
        Q.ClosedSurfaceGrid(r2)


# -- covariant derivatives ---------------------------------------------------


def test_covariant_derivative_examples(cfg_r2):
    one = Q.constant_section(1.0)
    p = np.array([2.0, 0.0])
    val = Q.covariant_derivative(cfg_r2, one, p, G.PointVector("xy", p, [0.0, 1.0]))
    assert abs(val + 2.0j) < 1e-14
    assert Q.covariant_derivative(cfg_r2, one, p, G.PointVector("xy", p, [0.0, 0.0])) == 0.0
    sx = Q.poly2_section({(1, 0): 1.0}, "x")
    p0 = np.array([0.0, 0.0])
    assert abs(Q.covariant_derivative(cfg_r2, sx, p0, G.PointVector("xy", p0, [1.0, 0.0])) - 1.0) < 1e-14


def test_covariant_derivative_hbar_scaling(r2):
    cfg = Q.PrequantumConfig(0.5, r2)
    one = Q.constant_section(1.0)
    p = np.array([2.0, 0.0])
    val = Q.covariant_derivative(cfg, one, p, G.PointVector("xy", p, [0.0, 1.0]))
    assert abs(val + 4.0j) < 1e-13


def test_covariant_derivative_fd_fallback(cfg_r2):
    plain = Q.Section("gauss", lambda chart, pts: np.exp(1j * pts[:, 0] + 0.2 * pts[:, 1]))
    p = np.array([0.4, -0.3])
    u = G.PointVector("xy", p, [1.0, 2.0])
    val = Q.covariant_derivative(cfg_r2, plain, p, u)
    s = np.exp(1j * 0.4 + 0.2 * -0.3)
    exact = (1j * 1.0 + 0.2 * 2.0) * s - 1j * (0.4 * 2.0) * s
    assert abs(val - exact) < 1e-9


def test_pullback_covariant_derivative_examples(cfg_r2, r2, grid64):
    one = Q.constant_section(1.0)
    path = P.line_path(r2, grid64, [0, 0], [1, 0])
    val = Q.pullback_covariant_derivative(cfg_r2, one, path, P.constant_variation(path, [0, 1]))
    assert abs(val + 0.5j) < 1e-14
    sx = Q.poly2_section({(1, 0): 1.0}, "x")
    val2 = Q.pullback_covariant_derivative(cfg_r2, sx, path, P.constant_variation(path, [1, 0]))
    assert abs(val2 - 1.0) < 1e-14
    # velocity field with vanishing start vector and zero potential pairing
    vel = P.PathTangent(path, path.velocities())
    shifted = P.path_from_function(
        r2, "xy", grid64, lambda t: np.array([np.cos(np.pi * t), 0.0])
    )
    vel_s = P.PathTangent(shifted, shifted.velocities())
    assert abs(Q.pullback_covariant_derivative(cfg_r2, one, shifted, vel_s)) < 1e-12


def test_curvature_residual(cfg_r2, cfg_s2, r2, s2):
    circle = P.circle_path(r2, P.PathGrid(128), center=(0.2, 0.1), radius=0.7)
    assert Q.curvature_residual(cfg_r2, circle, [1, 0], [0, 1], step=1e-4) < 1e-6
    assert Q.curvature_residual(cfg_r2, circle, [1, 0], [1, 0], step=1e-4) == 0.0
    arc = P.arc_path(s2, P.PathGrid(256))
    assert Q.curvature_residual(cfg_s2, arc, [1, 0], [0, 1], step=1e-4) < 1e-5


# -- loops, surfaces, holonomy ------------------------------------------------


def test_loop_grid_validation(r2, grid64):
    pts = np.zeros((17, 65, 2))
    pts[0, 0, 0] = 1.0  # break closure against the final row
    with pytest.raises(DimensionError):
        Q.LoopOfPathsGrid(r2, "xy", grid64, pts)
    with pytest.raises(DimensionError):
        Q.LoopOfPathsGrid(r2, "xy", grid64, np.zeros((7, 65, 2)))


def test_holonomy_chart_closed_forms(cfg_r2, r2):
    grid = P.PathGrid(64)
    for r in (0.5, 0.9):
        loop = Q.sweep_circle_loop(r2, grid, s_count=128, radius=r)
        h = Q.holonomy_chart(cfg_r2, loop)
        assert abs(abs(h) - 1.0) < 1e-12
        assert abs(np.angle(h * np.conj(np.exp(1j * np.pi * r * r)))) < 1e-6
    loop = Q.sweep_circle_loop(
        r2, grid, s_count=128, radius_fn=lambda t: 0.8 * np.sqrt(t) if t > 0 else 0.0
    )
    h = Q.holonomy_chart(cfg_r2, loop)
    assert abs(np.angle(h * np.conj(np.exp(1j * np.pi * 0.64 / 2.0)))) < 1e-6


def test_holonomy_chart_respects_hbar(r2):
    cfg = Q.PrequantumConfig(0.35, r2)
    loop = Q.sweep_circle_loop(r2, P.PathGrid(64), s_count=128, radius=0.6)
    h = Q.holonomy_chart(cfg, loop)
    assert abs(np.angle(h * np.conj(np.exp(1j * np.pi * 0.36 / 0.35)))) < 1e-6


def test_holonomy_chart_degenerate_loop(cfg_r2, r2):
    loop = Q.loop_from_function(r2, P.PathGrid(16), 16, lambda s, t: np.array([0.3, 0.4]))
    assert abs(Q.holonomy_chart(cfg_r2, loop) - 1.0) < 1e-14


def test_holonomy_chart_needs_potential_domain(cfg_s2, s2):
    # latitude loops wind through the angle seam: not a single potential domain
    loop = Q.latitude_sweep_loop(s2, P.PathGrid(16), s_count=32, phi=1.0)
    with pytest.raises(ChartDomainError):
        Q.holonomy_chart(cfg_s2, loop)


def test_holonomy_surface_agrees_with_chart(cfg_r2, r2):
    grid = P.PathGrid(128)
    loop = Q.sweep_circle_loop(
        r2, grid, s_count=128, radius_fn=lambda t: 0.6 + 0.3 * t * t * (3 - 2 * t)
    )
    h1 = Q.holonomy_chart(cfg_r2, loop)
    h2 = Q.holonomy_surface(cfg_r2, Q.disk_surface(r2, loop, eps_count=32), loop)
    assert abs(abs(h2) - 1.0) < 1e-12
    assert abs(np.angle(h1 * np.conj(h2))) < 1e-6


def test_surface_boundary_mismatch(cfg_r2, r2):
    grid = P.PathGrid(64)
    loop = Q.sweep_circle_loop(r2, grid, s_count=64, radius=0.8)
    other = Q.sweep_circle_loop(r2, grid, s_count=64, radius=0.8 + 1e-6)
    surf = Q.disk_surface(r2, other, eps_count=16)
    with pytest.raises(BoundaryMismatchError):
        Q.holonomy_surface(cfg_r2, surf, loop)
    small = Q.sweep_circle_loop(r2, grid, s_count=32, radius=0.8)
    with pytest.raises(BoundaryMismatchError):
        Q.holonomy_surface(cfg_r2, surf, small)


def test_cap_fluxes_match_closed_forms(s2):
    phi0 = 1.1
    loop = Q.latitude_sweep_loop(s2, P.PathGrid(64), s_count=128, phi=phi0)
    north = Q.cap_surface(s2, loop, eps_count=64, pole="north").fluxes()
    south = Q.cap_surface(s2, loop, eps_count=64, pole="south").fluxes()
    assert np.max(np.abs(north - 2 * np.pi * (1 - np.cos(phi0)))) < 1e-7
    assert np.max(np.abs(south + 2 * np.pi * (1 + np.cos(phi0)))) < 1e-6


def test_cap_complement_surface_independence(cfg_s2, s2):
    # at integral level the two spanning caps give the same holonomy
    loop = Q.latitude_sweep_loop(s2, P.PathGrid(64), s_count=128, phi=1.1)
    h_n = Q.holonomy_surface(cfg_s2, Q.cap_surface(s2, loop, 64, pole="north"), loop)
    h_s = Q.holonomy_surface(cfg_s2, Q.cap_surface(s2, loop, 64, pole="south"), loop)
    assert abs(np.angle(h_n * np.conj(h_s))) < 1e-6


def test_cap_complement_flux_identity_nonintegral(s2):
    # for general hbar the phase gap equals the total-flux phase
    cfg = Q.PrequantumConfig(0.7, s2)
    loop = Q.latitude_sweep_loop(s2, P.PathGrid(64), s_count=128, phi=1.3)
    h_n = Q.holonomy_surface(cfg, Q.cap_surface(s2, loop, 64, pole="north"), loop)
    h_s = Q.holonomy_surface(cfg, Q.cap_surface(s2, loop, 64, pole="south"), loop)
    predicted = np.exp(1j * Q.ClosedSurfaceGrid(s2).total_flux() / cfg.hbar)
    assert abs(np.angle(h_n * np.conj(h_s) * np.conj(predicted))) < 1e-6


def test_lambda_line_integral_cross_check(cfg_r2, r2):
    grid = P.PathGrid(64)
    loop = Q.sweep_circle_loop(
        r2, grid, s_count=128, radius_fn=lambda t: 0.6 * (1 + 0.5 * t * t * (3 - 2 * t))
    )
    v1 = Q.lambda_line_integral(cfg_r2, loop)
    v2 = Q.lambda_flux_form(cfg_r2, loop)
    assert abs(v1) > 0.1  # nontrivial case
    assert abs(v1 - v2) < 1e-8
    constant = Q.sweep_circle_loop(r2, grid, s_count=128, radius=0.9)
    assert abs(Q.lambda_line_integral(cfg_r2, constant)) < 1e-10
    flat = Q.loop_from_function(
        r2, grid, 32, lambda s, t: np.array([0.2 + (1 + 0.5 * t) * np.sin(2 * np.pi * s), -0.1])
    )
    assert abs(Q.lambda_line_integral(cfg_r2, flat)) < 1e-10
    assert abs(Q.lambda_flux_form(cfg_r2, flat)) < 1e-10


# -- operators ----------------------------------------------------------------


def test_operator_closed_forms(cfg_r2, r2, coord_x, grid64):
    one = Q.constant_section(1.0)
    path = P.line_path(r2, grid64, [0, 0], [1, 0])
    assert abs(Q.apply_operator(cfg_r2, P.tilde_observable(coord_x), one, path)) < 1e-14
    sec = Q.poly2_section({(0, 0): 0.4, (1, 0): 1.0}, "s")
    val = Q.apply_operator(cfg_r2, P.path_constant(2.5), sec, path)
    assert abs(val - 2.5 * sec.value("xy", path.points[0])) < 1e-14


def test_operator_product_five_term_agreement(cfg_r2, r2, coord_x, coord_y, rng):
    sec = Q.poly2_section({(0, 0): 1.0, (1, 0): 0.5, (0, 1): -0.3j}, "s")
    for path in (
        P.line_path(r2, P.PathGrid(128), [0.1, 0.2], [0.9, 1.1]),
        P.circle_path(r2, P.PathGrid(128), center=(0.3, -0.2), radius=0.7),
    ):
        a = Q.apply_operator(cfg_r2, P.path_product(coord_x, coord_y), sec, path)
        b = Q.apply_operator_product(cfg_r2, coord_x, coord_y, sec, path)
        assert abs(a - b) <= 1e-8 * abs(b)


def test_operator_linearity(cfg_r2, r2, coord_x, coord_y, rng):
    path = P.circle_path(r2, P.PathGrid(64), center=(0.1, 0.2), radius=0.6)
    s1 = Q.poly2_section({(1, 0): 1.0}, "s1")
    s2c = Q.poly2_section({(0, 1): 1.0 + 0.5j}, "s2")
    a, b = 1.3 - 0.2j, -0.7 + 0.9j
    combo = Q.Section(
        "combo",
        lambda chart, pts: a * s1.eval_fn(chart, pts) + b * s2c.eval_fn(chart, pts),
        lambda chart, pts: a * s1.grad_fn(chart, pts) + b * s2c.grad_fn(chart, pts),
    )
    phi = P.tilde_observable(coord_x)
    lhs = Q.apply_operator(cfg_r2, phi, combo, path)
    rhs = a * Q.apply_operator(cfg_r2, phi, s1, path) + b * Q.apply_operator(cfg_r2, phi, s2c, path)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_commutator_coordinate_pair(cfg_r2, r2, coord_x, coord_y):
    one = Q.constant_section(1.0)
    path = P.circle_path(r2, P.PathGrid(128), center=(0.2, 0.1), radius=0.7)
    res = Q.commutator_residual(
        cfg_r2, P.tilde_observable(coord_x), P.tilde_observable(coord_y), one, path, step=1e-4
    )
    assert res < 1e-4


def test_commutator_trivial_cases(cfg_r2, r2, coord_x):
    one = Q.constant_section(1.0)
    xt = P.tilde_observable(coord_x)
    path = P.circle_path(r2, P.PathGrid(64), center=(0.2, 0.1), radius=0.7)
    assert Q.commutator_residual(cfg_r2, xt, xt, one, path) < 1e-12
    assert Q.commutator_residual(cfg_r2, xt, P.path_constant(3.0), one, path) < 1e-12


def test_commutator_h_refinement(cfg_r2, r2, coord_y):
    # polynomial data is differentiated exactly by the extrapolated central
    # differences; an exponential section exposes the truncation order
    xsq = G.poly2_observable({(2, 0): 0.5}, "xx/2")
    sec = Q.Section(
        "exp",
        lambda chart, pts: np.exp(0.9 * pts[:, 0] + 0.4 * pts[:, 1]),
        lambda chart, pts: np.stack(
            [0.9 * np.exp(0.9 * pts[:, 0] + 0.4 * pts[:, 1]),
             0.4 * np.exp(0.9 * pts[:, 0] + 0.4 * pts[:, 1])], axis=1
        ).astype(complex),
    )
    path = P.circle_path(r2, P.PathGrid(256), center=(0.2, 0.1), radius=0.7)
    phi1 = P.tilde_observable(xsq)
    phi2 = P.tilde_observable(coord_y)
    r_coarse = Q.commutator_residual(cfg_r2, phi1, phi2, sec, path, step=4e-1)
    r_fine = Q.commutator_residual(cfg_r2, phi1, phi2, sec, path, step=2e-1)
    assert r_fine < 0.55 * r_coarse
    # practical steps sit at the quadrature floor, far below tolerance
    assert Q.commutator_residual(cfg_r2, phi1, phi2, sec, path, step=1e-3) < 1e-6


def test_inner_product(t2_unit_level, rng):
    cfg = Q.PrequantumConfig(1.0, t2_unit_level)
    one = Q.constant_section(1.0)
    val = Q.inner_product(cfg, one, one)
    assert abs(val - 2.0 * np.pi) < 1e-10
    assert abs(Q.inner_product(cfg, one, Q.constant_section(0.0))) == 0.0
    for _ in range(3):
        c1 = {k: complex(rng.normal(), rng.normal()) for k in [(0, 0), (1, 0), (0, 2)]}
        c2 = {k: complex(rng.normal(), rng.normal()) for k in [(0, 1), (2, 0)]}
        s1, s2c = Q.poly2_section(c1), Q.poly2_section(c2)
        ip12 = Q.inner_product(cfg, s1, s2c)
        ip21 = Q.inner_product(cfg, s2c, s1)
        assert abs(ip12 - np.conj(ip21)) <= 1e-12 * max(1.0, abs(ip12))
        assert Q.inner_product(cfg, s1, s1).real > 0


def test_inner_product_noncompact_needs_box(cfg_r2):
    one = Q.constant_section(1.0)
    with pytest.raises(NonCompactDomainError):
        Q.inner_product(cfg_r2, one, one)
    boxed = Q.inner_product(
        cfg_r2, one, one, Q.ChartQuadratureGrid(64, 64, box=((0.0, 1.0), (0.0, 2.0)))
    )
    assert abs(boxed - 2.0) < 1e-12

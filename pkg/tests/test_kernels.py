"""Kernel lane parity and quadrature exactness."""

import numpy as np
import pytest

from pathquant import _kernels
from pathquant._kernels import _pykernels as pk

try:
    from pathquant._kernels import _ckern as ck

    LANES = [pk, ck]
except ImportError:
    ck = None
    LANES = [pk]

needs_compiled = pytest.mark.skipif(ck is None, reason="compiled kernels not built")


@pytest.mark.parametrize("lane", LANES)
def test_simpson_exact_for_cubics(lane):
    t = np.linspace(0.0, 1.0, 65)
    dt = t[1] - t[0]
    for coeffs in ([1.0], [0.0, 1.0], [0.5, -1.0, 3.0], [0.0, 0.0, 0.0, 2.0]):
        y = np.polyval(coeffs[::-1], t)
        exact = sum(c / (k + 1) for k, c in enumerate(coeffs))
        assert abs(lane.simpson(y, dt) - exact) < 1e-14


@pytest.mark.parametrize("lane", LANES)
def test_simpson_rejects_odd_interval_counts(lane):
    with pytest.raises(ValueError):
        lane.simpson(np.zeros(10), 0.1)
    with pytest.raises(ValueError):
        lane.cumulative_simpson(np.zeros(2), 0.1)


@pytest.mark.parametrize("lane", LANES)
def test_cumulative_simpson_prefixes(lane):
    t = np.linspace(0.0, 1.0, 33)
    dt = t[1] - t[0]
    # exact on quadratics at every node
    pref = lane.cumulative_simpson(t**2, dt)
    assert np.max(np.abs(pref - t**3 / 3.0)) < 1e-15
    # final entry is the composite Simpson total
    y = np.sin(3.0 * t) + t**4
    assert abs(lane.cumulative_simpson(y, dt)[-1] - lane.simpson(y, dt)) < 1e-14


def test_cumulative_simpson_fourth_order():
    errors = []
    ns = [16, 32, 64, 128]
    for n in ns:
        t = np.linspace(0.0, 1.0, n + 1)
        pref = pk.cumulative_simpson(np.exp(t), t[1] - t[0])
        errors.append(np.max(np.abs(pref - (np.exp(t) - 1.0))))
    slope = np.polyfit(np.log(ns), np.log(errors), 1)[0]
    assert -slope > 3.7


@pytest.mark.parametrize("lane", LANES)
def test_solve_small_batch_roundtrip(lane, rng):
    mats = rng.normal(size=(40, 6, 6))
    xs = rng.normal(size=(40, 6))
    rhs = np.einsum("bij,bj->bi", mats, xs)
    sol, min_piv = lane.solve_small_batch(mats, rhs)
    assert min_piv > 1e-12
    assert np.max(np.abs(sol - xs)) < 1e-9


@pytest.mark.parametrize("lane", LANES)
def test_solve_small_batch_flags_singular(lane):
    mats = np.zeros((1, 2, 2))
    mats[0] = [[1.0, 2.0], [2.0, 4.0]]
    _, min_piv = lane.solve_small_batch(mats, np.ones((1, 2)))
    assert min_piv < 1e-12


@needs_compiled
def test_lane_parity(rng):
    y = rng.normal(size=(5, 65))
    assert np.allclose(ck.simpson(y, 0.01), pk.simpson(y, 0.01), rtol=0, atol=1e-14)
    assert np.allclose(
        ck.cumulative_simpson(y, 0.01), pk.cumulative_simpson(y, 0.01), rtol=0, atol=1e-14
    )
    mats = rng.normal(size=(10, 4, 4))
    rhs = rng.normal(size=(10, 4))
    x1, p1 = ck.solve_small_batch(mats, rhs)
    x2, p2 = pk.solve_small_batch(mats, rhs)
    assert np.max(np.abs(x1 - x2)) < 1e-12
    assert abs(p1 - p2) < 1e-15
    kh = rng.normal(size=6)
    nn = rng.integers(-2, 3, size=6).astype(float)
    om = np.abs(rng.normal(size=6)) + 0.5
    a, b = rng.normal(size=6), rng.normal(size=6)
    x = np.linspace(0, 5, 33)
    th = np.linspace(0, 6, 17)
    f1, d1 = ck.mode_field(kh, nn, om, a, b, x, th, 0.37)
    f2, d2 = pk.mode_field(kh, nn, om, a, b, x, th, 0.37)
    assert np.max(np.abs(f1 - f2)) < 1e-13
    assert np.max(np.abs(d1 - d2)) < 1e-13


def test_backend_reports_lane():
    assert _kernels.BACKEND in ("compiled", "python")

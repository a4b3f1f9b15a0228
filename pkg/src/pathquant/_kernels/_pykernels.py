"""NumPy implementations of the hot kernels.

Same call signatures as the compiled lane (`_ckern`); whichever lane is
active is re-exported by the package-level `_kernels` namespace.
"""

import numpy as np

_weights_cache = {}


def _simpson_weights(n):
    w = _weights_cache.get(n)
    if w is None:
        w = np.ones(n + 1)
        w[1:-1:2] = 4.0
        w[2:-2:2] = 2.0
        w /= 3.0
        _weights_cache[n] = w
    return w


def simpson(values, dt):
    """Composite Simpson over the last axis; n = len-1 must be even, >= 2."""
    y = np.asarray(values, dtype=float)
    n = y.shape[-1] - 1
    if n < 2 or n % 2:
        raise ValueError(f"Simpson needs an even number of intervals >= 2, got {n}")
    return y @ _simpson_weights(n) * dt


def cumulative_simpson(values, dt):
    """Prefix integrals on the Simpson grid.

    Each pair of subintervals is handled by integrating the interpolating
    parabola over its two halves, so the final entry reproduces the composite
    Simpson total and every prefix is O(dt^4) accurate.
    """
    y = np.asarray(values, dtype=float)
    n = y.shape[-1] - 1
    if n < 2 or n % 2:
        raise ValueError(f"cumulative Simpson needs an even number of intervals >= 2, got {n}")
    left = y[..., 0:-1:2]
    mid = y[..., 1::2]
    right = y[..., 2::2]
    first = dt / 12.0 * (5.0 * left + 8.0 * mid - right)
    second = dt / 12.0 * (-left + 8.0 * mid + 5.0 * right)
    pair_totals = np.cumsum(first + second, axis=-1)
    out = np.zeros_like(y)
    out[..., 2::2] = pair_totals
    out[..., 1::2] = pair_totals - second
    return out


def solve_small_batch(mats, rhs):
    """Partial-pivot Gaussian elimination for a batch of small systems.

    mats: (B, m, m), rhs: (B, m).  Returns (solutions, min_rel_pivot) where
    min_rel_pivot is the smallest |pivot| / max|A| seen over the whole batch;
    callers treat values below their singularity threshold as degenerate.
    """
    a = np.array(mats, dtype=float)
    b = np.array(rhs, dtype=float)
    nb, m, _ = a.shape
    scale = np.max(np.abs(a), axis=(1, 2))
    scale = np.where(scale == 0.0, 1.0, scale)
    batch = np.arange(nb)
    min_rel = np.inf
    for k in range(m):
        piv_rows = np.argmax(np.abs(a[:, k:, k]), axis=1) + k
        rows_k = a[batch, piv_rows].copy()
        a[batch, piv_rows] = a[:, k]
        a[:, k] = rows_k
        rhs_k = b[batch, piv_rows].copy()
        b[batch, piv_rows] = b[:, k]
        b[:, k] = rhs_k
        piv = a[:, k, k]
        min_rel = min(min_rel, float(np.min(np.abs(piv) / scale)))
        piv_safe = np.where(piv == 0.0, 1.0, piv)
        if k + 1 < m:
            factors = a[:, k + 1 :, k] / piv_safe[:, None]
            a[:, k + 1 :, k:] -= factors[:, :, None] * a[:, None, k, k:]
            b[:, k + 1 :] -= factors * b[:, k][:, None]
    x = np.zeros_like(b)
    for k in range(m - 1, -1, -1):
        acc = b[:, k] - np.einsum("bj,bj->b", a[:, k, k + 1 :], x[:, k + 1 :])
        piv = a[:, k, k]
        x[:, k] = acc / np.where(piv == 0.0, 1.0, piv)
    return x, min_rel


def mode_field(k_hat, n_circ, omega, amp_cos, amp_sin, x, theta, t):
    """Evaluate a trigonometric mode sum and its time derivative.

    Field = sum_m  A_m cos(k_m x + n_m theta - w_m t) + B_m sin(...), returned
    on the (len(x), len(theta)) product grid together with its t-derivative.
    """
    phase = (
        k_hat[:, None, None] * x[None, :, None]
        + n_circ[:, None, None] * theta[None, None, :]
        - omega[:, None, None] * t
    )
    c = np.cos(phase)
    s = np.sin(phase)
    field = np.einsum("m,mij->ij", amp_cos, c) + np.einsum("m,mij->ij", amp_sin, s)
    dt_field = np.einsum("m,mij->ij", amp_cos * omega, s) - np.einsum(
        "m,mij->ij", amp_sin * omega, c
    )
    return field, dt_field

"""Mode spaces for the Klein-Gordon equation on a spatial circle and its
circle-compactified extension.

Spacetime is (t, x) with x on a circle of circumference Lx, signature chosen
so modes obey w_k^2 = k^2 + rho^2 (k the integer wavenumber scaled by
2*pi/Lx).  The extended spacetime appends a circle of radius R whose metric
component may be taken with either sign; the resulting dispersion is
w^2 = k^2 + rho^2 + s * n^2 / R^2 with s = -1 ("paper_literal") or s = +1
("spacelike").  Fields are evaluated analytically from mode data, so the
solution-space pairings reduce to trigonometric quadratures that are exact
below the grid Nyquist limit.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import mode_field, simpson
from .errors import DimensionError

SIGN_CONVENTIONS = {"paper_literal": -1.0, "spacelike": 1.0}


@dataclass(frozen=True)
class SpacetimeConfig:
    """Circle circumference, mass, compactification radius, and mode cutoffs."""

    lx: float = 2.0 * np.pi
    rho: float = 2.0
    radius: float = 1.0
    theta_metric_sign: str = "paper_literal"
    kcut: int = 4
    ncut: int = 1

    def __post_init__(self):
        if self.lx <= 0 or self.radius <= 0:
            raise DimensionError("circle sizes must be positive")
        if self.rho < 0:
            raise DimensionError("mass must be nonnegative")
        if self.kcut < 1 or self.ncut < 1:
            raise DimensionError("mode cutoffs must be >= 1")
        if self.theta_metric_sign not in SIGN_CONVENTIONS:
            raise DimensionError(
                f"theta_metric_sign must be one of {sorted(SIGN_CONVENTIONS)}, "
                f"got {self.theta_metric_sign!r}"
            )

    @property
    def sign(self):
        return SIGN_CONVENTIONS[self.theta_metric_sign]

    def k_hat(self, k):
        return 2.0 * np.pi * np.asarray(k, dtype=float) / self.lx

    def omega_sq(self, k, n=0):
        kh = self.k_hat(k)
        return kh * kh + self.rho**2 + self.sign * np.asarray(n, dtype=float) ** 2 / self.radius**2

    def valid_bar_modes(self):
        """All (k, n) inside the cutoffs with a real frequency."""
        out = []
        for k in range(-self.kcut, self.kcut + 1):
            for n in range(-self.ncut, self.ncut + 1):
                if self.omega_sq(k, n) > 0.0:
                    out.append((k, n))
        return out


def _as_mode_array(modes, width):
    arr = np.atleast_2d(np.asarray(modes, dtype=float))
    if arr.shape[1] != width:
        raise DimensionError(f"mode rows must have {width} entries, got {arr.shape[1]}")
    return arr


@dataclass(frozen=True)
class ModeSolution:
    """Real solution on the base spacetime: sum of (k, A, B) travelling modes."""

    cfg: SpacetimeConfig
    modes: np.ndarray  # rows (k, A, B)
    omega_factor: float = 1.0  # deliberate dispersion defect for detector tests

    def __post_init__(self):
        arr = _as_mode_array(self.modes, 3)
        object.__setattr__(self, "modes", arr)
        if np.any(self.cfg.omega_sq(arr[:, 0]) <= 0.0):
            raise ValueError("every retained mode must have a real frequency")

    @property
    def k_hat(self):
        return self.cfg.k_hat(self.modes[:, 0])

    @property
    def omega(self):
        return self.omega_factor * np.sqrt(self.cfg.omega_sq(self.modes[:, 0]))

    def field_and_dt(self, x, t):
        f, d = mode_field(
            self.k_hat,
            np.zeros(len(self.modes)),
            self.omega,
            self.modes[:, 1],
            self.modes[:, 2],
            np.asarray(x, dtype=float),
            np.zeros(1),
            float(t),
        )
        return f[:, 0], d[:, 0]


@dataclass(frozen=True)
class BarModeSolution:
    """Real solution on the compactified spacetime: sum of (k, n, A, B) modes."""

    cfg: SpacetimeConfig
    modes: np.ndarray  # rows (k, n, A, B)
    omega_factor: float = 1.0

    def __post_init__(self):
        arr = _as_mode_array(self.modes, 4)
        object.__setattr__(self, "modes", arr)
        if np.any(np.abs(arr[:, 0]) > self.cfg.kcut) or np.any(np.abs(arr[:, 1]) > self.cfg.ncut):
            raise ValueError("mode numbers exceed the configured cutoffs")
        if np.any(self.cfg.omega_sq(arr[:, 0], arr[:, 1]) <= 0.0):
            raise ValueError("every retained mode must have a real frequency")

    @property
    def k_hat(self):
        return self.cfg.k_hat(self.modes[:, 0])

    @property
    def omega(self):
        return self.omega_factor * np.sqrt(self.cfg.omega_sq(self.modes[:, 0], self.modes[:, 1]))

    def field_and_dt(self, x, theta, t):
        return mode_field(
            self.k_hat,
            self.modes[:, 1],
            self.omega,
            self.modes[:, 2],
            self.modes[:, 3],
            np.asarray(x, dtype=float),
            np.asarray(theta, dtype=float),
            float(t),
        )


def scaled_omega(solution, factor):
    """Copy of a solution with all frequencies rescaled (dispersion detector)."""
    cls = type(solution)
    return cls(solution.cfg, solution.modes.copy(), omega_factor=solution.omega_factor * factor)


def kg_residual(cfg, solution, times=(0.0, 0.37, 0.73), nx=64, ntheta=16):
    """Max-norm wave-operator defect, via the analytic dispersion substitution.

    Substituting a mode into the operator leaves the mode scaled by
    (k^2 + rho^2 [+ s n^2/R^2] - w^2); the defect field is evaluated on a
    small space(-circle) grid over the given times.
    """
    if isinstance(solution, BarModeSolution):
        n = solution.modes[:, 1]
        amp_c = solution.modes[:, 2]
        amp_s = solution.modes[:, 3]
        thetas = 2.0 * np.pi * np.arange(ntheta) / ntheta
        defect = cfg.omega_sq(solution.modes[:, 0], n) - solution.omega**2
    else:
        n = np.zeros(len(solution.modes))
        amp_c = solution.modes[:, 1]
        amp_s = solution.modes[:, 2]
        thetas = np.zeros(1)
        defect = cfg.omega_sq(solution.modes[:, 0]) - solution.omega**2
    xs = cfg.lx * np.arange(nx) / nx
    worst = 0.0
    for t in times:
        f, _ = mode_field(
            solution.k_hat, n, solution.omega, amp_c * defect, amp_s * defect, xs, thetas, float(t)
        )
        worst = max(worst, float(np.max(np.abs(f))))
    return worst


# ---------------------------------------------------------------------------
# solution-space pairings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CauchySurfaceSpec:
    """Constant-time slice with periodic quadrature resolutions."""

    t0: float = 0.0
    nx: int = 128
    ntheta: int = 128

    def __post_init__(self):
        if self.nx < 32 or self.nx % 2 or self.ntheta < 32 or self.ntheta % 2:
            raise DimensionError("surface resolutions must be even and >= 32")

    def x_nodes(self, cfg):
        return cfg.lx * np.arange(self.nx) / self.nx

    def theta_nodes(self):
        return 2.0 * np.pi * np.arange(self.ntheta) / self.ntheta


def omega_m(cfg, s1, s2, surface):
    """Cauchy-surface pairing of two base solutions (periodic trapezoid in x)."""
    xs = surface.x_nodes(cfg)
    f1, d1 = s1.field_and_dt(xs, surface.t0)
    f2, d2 = s2.field_and_dt(xs, surface.t0)
    dx = cfg.lx / surface.nx
    return 0.5 * dx * float(np.sum(f2 * d1 - f1 * d2))


def omega_bar(cfg, s1, s2, surface):
    """Pairing of two compactified solutions over the product Cauchy surface.

    The surface is the base slice times the circle; the unit normal stays in
    the time direction and the measure carries the circle radius.
    """
    xs = surface.x_nodes(cfg)
    thetas = surface.theta_nodes()
    f1, d1 = s1.field_and_dt(xs, thetas, surface.t0)
    f2, d2 = s2.field_and_dt(xs, thetas, surface.t0)
    dx = cfg.lx / surface.nx
    dth = 2.0 * np.pi / surface.ntheta
    return 0.5 * cfg.radius * dx * dth * float(np.sum(f2 * d1 - f1 * d2))


# ---------------------------------------------------------------------------
# embedding into the path space over the solution space
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EmbeddedSolutionPath:
    """A compactified solution read as a path of base solutions.

    The path parameter u sweeps the circle angle theta = 2*pi*u; each slice
    is a base solution whose per-mode effective mass squared is
    rho^2 + s n^2 / R^2.
    """

    cfg: SpacetimeConfig
    solution: BarModeSolution
    grid: object

    def __post_init__(self):
        if self.grid.interval != (0.0, 1.0):
            raise DimensionError("embedded solution paths use the unit interval")

    def thetas(self):
        return 2.0 * np.pi * self.grid.nodes

    def slice_modes(self, j):
        """Per-mode (k_hat, omega, A', B', eff_mass_sq) of the slice at node j."""
        sol = self.solution
        c = 2.0 * np.pi * sol.modes[:, 1] * self.grid.nodes[j]
        a, b = sol.modes[:, 2], sol.modes[:, 3]
        a_eff = a * np.cos(c) + b * np.sin(c)
        b_eff = b * np.cos(c) - a * np.sin(c)
        eff_mass_sq = sol.omega**2 - sol.k_hat**2
        return sol.k_hat, sol.omega, a_eff, b_eff, eff_mass_sq

    def slice_field_and_dt(self, j, x, t):
        kh, om, a_eff, b_eff, _ = self.slice_modes(j)
        f, d = mode_field(
            kh, np.zeros(len(kh)), om, a_eff, b_eff, np.asarray(x, dtype=float), np.zeros(1), float(t)
        )
        return f[:, 0], d[:, 0]


def embed_bar_solution(cfg, solution, grid):
    return EmbeddedSolutionPath(cfg, solution, grid)


def omega_tilde_solutions(cfg, s1, s2, surface, grid):
    """Path-space pairing of two embedded solutions: 2*pi*R times the Simpson
    average over the path parameter of the slice pairings."""
    xs = surface.x_nodes(cfg)
    thetas = 2.0 * np.pi * grid.nodes
    f1, d1 = s1.field_and_dt(xs, thetas, surface.t0)
    f2, d2 = s2.field_and_dt(xs, thetas, surface.t0)
    dx = cfg.lx / surface.nx
    slice_pairings = 0.5 * dx * np.sum(f2 * d1 - f1 * d2, axis=0)
    return 2.0 * np.pi * cfg.radius * float(simpson(slice_pairings, grid.dt))


def prop_coincidence_residual(cfg, s1, s2, surface, grid, floor=1e-12):
    """Relative gap between the path-space pairing and the direct product-surface one."""
    ot = omega_tilde_solutions(cfg, s1, s2, surface, grid)
    ob = omega_bar(cfg, s1, s2, surface)
    return abs(ot - ob) / max(abs(ob), floor)


# ---------------------------------------------------------------------------
# mode-set builders
# ---------------------------------------------------------------------------


def single_mode(cfg, k=1, a=1.0, b=0.0):
    return ModeSolution(cfg, [(k, a, b)])


def single_bar_mode(cfg, k=1, n=1, a=1.0, b=0.0):
    return BarModeSolution(cfg, [(k, n, a, b)])


def random_bar_solution(cfg, count, rng, amp_scale=1.0):
    """Random mixture over the valid (k, n) set; amplitudes uniform in [-1, 1]."""
    valid = cfg.valid_bar_modes()
    if count > len(valid):
        raise DimensionError(f"requested {count} modes but only {len(valid)} are valid")
    picks = rng.choice(len(valid), size=count, replace=False)
    rows = [
        (valid[i][0], valid[i][1], amp_scale * rng.uniform(-1, 1), amp_scale * rng.uniform(-1, 1))
        for i in picks
    ]
    return BarModeSolution(cfg, rows)


def random_bar_pair(cfg, count, rng, min_pairing=1e-3, max_tries=64):
    """Random solution pair on a shared mode support, with a generic pairing.

    Disjoint supports pair to exactly zero, which turns the floor-relative
    coincidence residual into a ratio of rounding noise; redrawing until the
    pairing clears a small scale keeps the relative comparison meaningful.
    """
    valid = cfg.valid_bar_modes()
    if count > len(valid):
        raise DimensionError(f"requested {count} modes but only {len(valid)} are valid")
    probe = CauchySurfaceSpec(t0=0.0, nx=64, ntheta=64)
    for _ in range(max_tries):
        picks = rng.choice(len(valid), size=count, replace=False)
        rows = [valid[i] for i in picks]
        s1 = BarModeSolution(
            cfg, [(k, n, rng.uniform(-1, 1), rng.uniform(-1, 1)) for k, n in rows]
        )
        s2 = BarModeSolution(
            cfg, [(k, n, rng.uniform(-1, 1), rng.uniform(-1, 1)) for k, n in rows]
        )
        if abs(omega_bar(cfg, s1, s2, probe)) >= min_pairing:
            return s1, s2
    raise DimensionError("failed to draw a solution pair with a generic pairing")

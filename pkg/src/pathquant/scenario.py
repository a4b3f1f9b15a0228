"""Scenario files: YAML key-value documents driving the verification suites.

Schema (all blocks optional except `suite` and `seed`):

    suite: all            # poisson | potential | chen | holonomy | operators | kg | all
    seed: 1234            # integer; all randomized checks derive their streams from it
    hbar: 1.0
    model: {name: s2, radius: 1.0, scale: 1.0, delta: 0.05}
    grid:
      n: 256              # path intervals (even, >= 8)
      s_count: 128        # transversal intervals for loops of paths (even)
      eps_count: 32       # radial intervals for spanning surfaces (even)
      nx: 128             # Cauchy-slice resolution (even, >= 32)
      ntheta: 128         # circle resolution (even, >= 32)
      fd_step: 1.0e-4     # path-space variation step
      op_step: 1.0e-4     # operator commutator step
      flow_step: 1.0e-3   # Lie-flow step
    random: {pairs: 20, kg_draws: 50, kg_modes: 5}
    tolerances: {check_id: 1.0e-6}
    output: reports/out.json
"""

from dataclasses import dataclass, field

import yaml

from .errors import ConfigError

_GRID_DEFAULTS = {
    "n": 256,
    "s_count": 128,
    "eps_count": 32,
    "nx": 128,
    "ntheta": 128,
    "fd_step": 1e-4,
    "op_step": 1e-4,
    "flow_step": 1e-3,
}

_RANDOM_DEFAULTS = {"pairs": 20, "kg_draws": 50, "kg_modes": 5}

_TOP_KEYS = {"suite", "seed", "hbar", "model", "grid", "random", "tolerances", "output"}


@dataclass(frozen=True)
class Scenario:
    suite: str
    seed: int
    hbar: float = 1.0
    model: dict = field(default_factory=lambda: {"name": "s2", "radius": 1.0})
    grid: dict = field(default_factory=lambda: dict(_GRID_DEFAULTS))
    random: dict = field(default_factory=lambda: dict(_RANDOM_DEFAULTS))
    tolerances: dict = field(default_factory=dict)
    output: str = ""

    def tolerance(self, check_id, default):
        return float(self.tolerances.get(check_id, default))

    def with_grid(self, **overrides):
        g = dict(self.grid)
        g.update(overrides)
        return Scenario(
            self.suite, self.seed, self.hbar, dict(self.model), g, dict(self.random),
            dict(self.tolerances), self.output,
        )

    def echo(self):
        """Deterministic scenario image embedded in report bodies."""
        return {
            "suite": self.suite,
            "seed": self.seed,
            "hbar": self.hbar,
            "model": dict(self.model),
            "grid": dict(self.grid),
            "random": dict(self.random),
            "tolerances": dict(self.tolerances),
        }


def _require_positive_even(name, value, minimum):
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"grid.{name} must be an integer, got {value!r}")
    if value < minimum or value % 2:
        raise ConfigError(f"grid.{name} must be even and >= {minimum}, got {value}")


def scenario_from_dict(data, path="<dict>"):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: scenario must be a mapping")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown scenario keys {sorted(unknown)}")
    if "suite" not in data:
        raise ConfigError(f"{path}: missing required key 'suite'")
    if "seed" not in data:
        raise ConfigError(f"{path}: missing required key 'seed' (randomness must be seeded)")
    suite = data["suite"]
    if not isinstance(suite, str):
        raise ConfigError(f"{path}: suite must be a string")
    seed = data["seed"]
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError(f"{path}: seed must be a nonnegative integer")
    hbar = float(data.get("hbar", 1.0))
    if hbar <= 0:
        raise ConfigError(f"{path}: hbar must be positive")

    model = dict(data.get("model") or {"name": "s2", "radius": 1.0})
    if model.get("name") not in {"r2", "t2", "s2"}:
        raise ConfigError(f"{path}: model.name must be one of r2, t2, s2")

    grid = dict(_GRID_DEFAULTS)
    user_grid = data.get("grid") or {}
    unknown = set(user_grid) - set(_GRID_DEFAULTS)
    if unknown:
        raise ConfigError(f"{path}: unknown grid keys {sorted(unknown)}")
    grid.update(user_grid)
    _require_positive_even("n", grid["n"], 8)
    _require_positive_even("s_count", grid["s_count"], 8)
    _require_positive_even("eps_count", grid["eps_count"], 4)
    _require_positive_even("nx", grid["nx"], 32)
    _require_positive_even("ntheta", grid["ntheta"], 32)
    for key in ("fd_step", "op_step", "flow_step"):
        grid[key] = float(grid[key])
        if not 0 < grid[key] < 0.1:
            raise ConfigError(f"{path}: grid.{key} must lie in (0, 0.1)")

    random = dict(_RANDOM_DEFAULTS)
    user_random = data.get("random") or {}
    unknown = set(user_random) - set(_RANDOM_DEFAULTS)
    if unknown:
        raise ConfigError(f"{path}: unknown random keys {sorted(unknown)}")
    random.update(user_random)
    for key, value in random.items():
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise ConfigError(f"{path}: random.{key} must be a positive integer")

    tolerances = data.get("tolerances") or {}
    if not isinstance(tolerances, dict):
        raise ConfigError(f"{path}: tolerances must be a mapping")
    tolerances = {str(k): float(v) for k, v in tolerances.items()}

    output = data.get("output") or ""
    if not isinstance(output, str):
        raise ConfigError(f"{path}: output must be a string path")

    return Scenario(suite, seed, hbar, model, grid, random, tolerances, output)


def load_scenario(path):
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"scenario file {path} is not valid YAML: {exc}") from exc
    return scenario_from_dict(data, path=str(path))

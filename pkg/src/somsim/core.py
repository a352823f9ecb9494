"""Competitive-learning kernel for a single feature map.

Winner selection, Gaussian neighborhood cooperation, weight updates with
injectable excitatory pathologies, and training-trajectory capture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .exceptions import ComputationError, ConfigurationError, ContractViolation

DEFAULT_WIDTH = 20
DEFAULT_HEIGHT = 20
DEFAULT_LEARNING_RATE = 0.5
DEFAULT_SIGMA = 2.0
DEFAULT_STEPS = 1400
DEFAULT_SNAPSHOT_INTERVAL = 100
DEFAULT_EPS_STAB = 0.05


def _default_groups(input_dim):
    return {"all": tuple(range(input_dim))}


@dataclass
class FeatureMap:
    """A width x height grid of neurons, each holding a weight vector.

    dim_groups partitions the weight dimensions into named source groups,
    so that inter-map projections can learn at different rates.
    """

    width: int
    height: int
    input_dim: int
    weights: np.ndarray  # (width*height, input_dim) float64, row-major grid
    dim_groups: dict = None

    def __post_init__(self):
        if self.dim_groups is None:
            self.dim_groups = _default_groups(self.input_dim)
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        n = self.width * self.height
        if self.weights.shape != (n, self.input_dim):
            raise ConfigurationError(
                f"weights shape {self.weights.shape} != ({n}, {self.input_dim})")
        covered = sorted(d for dims in self.dim_groups.values() for d in dims)
        if covered != list(range(self.input_dim)):
            raise ConfigurationError(
                f"dim_groups {self.dim_groups} do not partition "
                f"0..{self.input_dim - 1}")

    @property
    def n_neurons(self):
        return self.width * self.height

    def position_of(self, index):
        """Grid position (row, col) of a row-major neuron index."""
        return divmod(int(index), self.width)

    def index_of(self, row, col):
        return int(row) * self.width + int(col)

    def grid_coords(self):
        """(n, 2) float64 array of (row, col) positions, row-major order."""
        rows, cols = np.divmod(np.arange(self.n_neurons), self.width)
        return np.column_stack([rows, cols]).astype(np.float64)

    def copy(self):
        return FeatureMap(self.width, self.height, self.input_dim,
                          self.weights.copy(), dict(self.dim_groups))


@dataclass
class TrainingConfig:
    """Constant-rate training parameters (no annealing)."""

    learning_rate: object = DEFAULT_LEARNING_RATE  # float, or dict group->rate
    sigma: float = DEFAULT_SIGMA
    steps: int = DEFAULT_STEPS
    snapshot_interval: int = DEFAULT_SNAPSHOT_INTERVAL
    rng_seed: int = 0
    omega_includes_winner: bool = False

    def __post_init__(self):
        rates = (self.learning_rate.values()
                 if isinstance(self.learning_rate, dict)
                 else [self.learning_rate])
        if any(r <= 0 for r in rates):
            raise ConfigurationError("learning rates must be > 0")
        if self.sigma <= 0:
            raise ConfigurationError("sigma must be > 0")
        if self.steps < 0:
            raise ConfigurationError("steps must be >= 0")
        if self.snapshot_interval < 1:
            raise ConfigurationError("snapshot_interval must be >= 1")

    def rho_vector(self, fmap):
        """Per-dimension learning rates expanded over the map's dim groups."""
        rho = np.empty(fmap.input_dim, dtype=np.float64)
        if isinstance(self.learning_rate, dict):
            for group, dims in fmap.dim_groups.items():
                try:
                    rate = self.learning_rate[group]
                except KeyError:
                    raise ConfigurationError(
                        f"no learning rate for dim group {group!r}")
                for d in dims:
                    rho[d] = rate
        else:
            rho[:] = self.learning_rate
        return rho


MODE_NONE = "none"
MODE_OVER_STRENGTHEN = "over_strengthen"
MODE_INCREASE_FACTOR = "increase_factor"

_MODE_CODES = {
    MODE_NONE: backend.MODE_NONE,
    MODE_OVER_STRENGTHEN: backend.MODE_OVER_STRENGTHEN,
    MODE_INCREASE_FACTOR: backend.MODE_INCREASE_FACTOR,
}


@dataclass(frozen=True)
class PathologySpec:
    """Per-map excitatory pathology switches."""

    mode: str = MODE_NONE
    omega: float = None
    c: float = None
    sigma_override: float = None

    def __post_init__(self):
        if self.mode not in _MODE_CODES:
            raise ConfigurationError(f"unknown pathology mode {self.mode!r}")
        if self.mode == MODE_OVER_STRENGTHEN:
            if self.omega is None or self.omega <= 1:
                raise ConfigurationError("over_strengthen requires omega > 1")
        if self.mode == MODE_INCREASE_FACTOR:
            if self.c is None or self.c <= 1:
                raise ConfigurationError("increase_factor requires C > 1")
        if self.sigma_override is not None and self.sigma_override <= 0:
            raise ConfigurationError("sigma_override must be > 0")

    @classmethod
    def none(cls, sigma_override=None):
        return cls(MODE_NONE, sigma_override=sigma_override)

    @classmethod
    def over_strengthen(cls, omega, sigma_override=None):
        return cls(MODE_OVER_STRENGTHEN, omega=omega,
                   sigma_override=sigma_override)

    @classmethod
    def increase_factor(cls, c=1.1, sigma_override=None):
        return cls(MODE_INCREASE_FACTOR, c=c, sigma_override=sigma_override)


NO_PATHOLOGY = PathologySpec()


@dataclass
class TrainingTrace:
    """Periodic weight snapshots taken during training.

    mean_step_displacement[j] is the mean per-neuron Euclidean weight
    displacement between snapshot j and the previous snapshot (the
    initial weights for j = 0).
    """

    snapshot_steps: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)  # full weight copies
    mean_step_displacement: list = field(default_factory=list)


def init_map(width, height, input_dim, bounds, rng_seed, dim_groups=None):
    """Create a map with weights drawn uniformly inside per-dim bounds."""
    if width < 1 or height < 1:
        raise ConfigurationError("map dimensions must be >= 1")
    if len(bounds) != input_dim:
        raise ConfigurationError("one (lo, hi) pair per dimension required")
    for lo, hi in bounds:
        if lo >= hi:
            raise ConfigurationError(f"invalid bounds ({lo}, {hi})")
    rng = np.random.default_rng(rng_seed)
    n = width * height
    weights = rng.random((n, input_dim))
    for d, (lo, hi) in enumerate(bounds):
        weights[:, d] = lo + weights[:, d] * (hi - lo)
    return FeatureMap(width, height, input_dim, weights, dim_groups)


def find_winner(fmap, x):
    """Grid position of the neuron nearest to x (ties: lowest row-major)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (fmap.input_dim,):
        raise ContractViolation(
            f"stimulus shape {x.shape} != ({fmap.input_dim},)")
    d2 = ((fmap.weights - x) ** 2).sum(axis=1)
    return fmap.position_of(np.argmin(d2))


def neighborhood_weight(r_i, r_star, sigma):
    """Gaussian cooperation weight for Euclidean grid distance."""
    if sigma <= 0:
        raise ContractViolation("sigma must be > 0")
    dr = r_i[0] - r_star[0]
    dc = r_i[1] - r_star[1]
    return math.exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma))


def _phi_table(fmap, sigma):
    coords = fmap.grid_coords()
    d2 = ((coords[:, None, :] - coords[None, :, :]) ** 2).sum(axis=-1)
    return np.exp(-d2 / (2.0 * sigma * sigma))


def _kernel_args(fmap, cfg, pathology):
    sigma = (pathology.sigma_override
             if pathology.sigma_override is not None else cfg.sigma)
    mode = _MODE_CODES[pathology.mode]
    factor = float(pathology.omega or 0.0)
    cval = float(pathology.c or 0.0)
    if pathology.mode == MODE_INCREASE_FACTOR and cval <= 1.0:
        # phi reaches 1 at the winner, so C <= 1 makes C - phi nonpositive
        raise ComputationError(f"C = {cval} does not exceed max phi = 1")
    phi = _phi_table(fmap, sigma)
    rho = cfg.rho_vector(fmap)
    return phi, rho, mode, factor, cval


def update_step(fmap, x, cfg, pathology=NO_PATHOLOGY, kernel=None):
    """Apply one presentation of stimulus x; returns the updated map."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (fmap.input_dim,):
        raise ContractViolation(
            f"stimulus shape {x.shape} != ({fmap.input_dim},)")
    phi, rho, mode, factor, cval = _kernel_args(fmap, cfg, pathology)
    out = fmap.copy()
    run = (kernel or backend.get_kernel()).run_training
    run(out.weights, phi, x[None, :], np.zeros(1, dtype=np.int64), rho,
        mode, factor, cval, cfg.omega_includes_winner,
        np.array([1], dtype=np.int64))
    return out


def train(fmap, stimuli, cfg, pathology=NO_PATHOLOGY, kernel=None):
    """Train for cfg.steps presentations drawn uniformly from the set.

    Returns (trained map, trace). Fully determined by cfg.rng_seed.
    """
    patterns = stimuli.pattern_matrix()
    if patterns.shape[0] == 0:
        raise ConfigurationError("empty stimulus set")
    if patterns.shape[1] != fmap.input_dim:
        raise ContractViolation(
            f"stimulus dim {patterns.shape[1]} != map dim {fmap.input_dim}")
    out = fmap.copy()
    trace = TrainingTrace()
    if cfg.steps == 0:
        trace.snapshot_steps = [0]
        trace.snapshots = [out.weights.copy()]
        trace.mean_step_displacement = [0.0]
        return out, trace

    phi, rho, mode, factor, cval = _kernel_args(fmap, cfg, pathology)
    rng = np.random.default_rng(cfg.rng_seed)
    order = rng.integers(0, patterns.shape[0], size=cfg.steps, dtype=np.int64)
    snap_steps = list(range(cfg.snapshot_interval, cfg.steps + 1,
                            cfg.snapshot_interval))
    if not snap_steps or snap_steps[-1] != cfg.steps:
        snap_steps.append(cfg.steps)
    run = (kernel or backend.get_kernel()).run_training
    snaps, _ = run(out.weights, phi, patterns, order, rho, mode, factor,
                   cval, cfg.omega_includes_winner,
                   np.array(snap_steps, dtype=np.int64))

    prev = fmap.weights
    for j, step in enumerate(snap_steps):
        snap = np.asarray(snaps[j]).copy()
        disp = float(np.sqrt(((snap - prev) ** 2).sum(axis=1)).mean())
        trace.snapshot_steps.append(step)
        trace.snapshots.append(snap)
        trace.mean_step_displacement.append(disp)
        prev = snap
    return out, trace


def stability_verdict(trace, analysis_fn, eps_stab=DEFAULT_EPS_STAB):
    """'stable' iff the categorical cluster signature is unchanged over the
    final three snapshots and the last inter-snapshot mean displacement is
    below eps_stab."""
    if len(trace.snapshots) < 3:
        raise ContractViolation("stability needs at least 3 snapshots")
    sigs = [analysis_fn(w) for w in trace.snapshots[-3:]]
    if sigs[0] == sigs[1] == sigs[2] and \
            trace.mean_step_displacement[-1] < eps_stab:
        return "stable"
    return "unstable"

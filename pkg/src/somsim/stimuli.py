"""Input-pattern construction for the three network levels.

Primary sets are random points, one per quadrant of [0,20)x[0,20).
Higher-level sets are built from the encoder fields of the maps below:
grid coordinates of randomly chosen encoding neurons, concatenated for
the associative level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError, PropagationError

DOMAIN = (0.0, 20.0)
N_CLASSES = 4

# class_id -> (row range, col range); lower-inclusive quadrants
QUADRANTS = {
    0: ((0.0, 10.0), (0.0, 10.0)),
    1: ((0.0, 10.0), (10.0, 20.0)),
    2: ((10.0, 20.0), (0.0, 10.0)),
    3: ((10.0, 20.0), (10.0, 20.0)),
}

PAIR_BY_CLASS = "by_class"
PAIR_UNIFORM = "uniform"


@dataclass
class Stimulus:
    values: np.ndarray
    class_id: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)


@dataclass
class StimulusSet:
    """Labeled input patterns with their domain bounds."""

    patterns: list
    bounds: list  # per-dim (lo, hi)
    provenance: str = "primary"
    seed: int = None

    def __post_init__(self):
        ids = [p.class_id for p in self.patterns]
        if len(set(ids)) != len(ids):
            raise ConfigurationError("duplicate class_id in stimulus set")
        dims = {p.values.shape for p in self.patterns}
        if len(dims) > 1:
            raise ConfigurationError("inconsistent stimulus dimensions")
        for p in self.patterns:
            for v, (lo, hi) in zip(p.values, self.bounds):
                if not (lo <= v < hi):
                    raise ConfigurationError(
                        f"stimulus value {v} outside bounds ({lo}, {hi})")

    @property
    def input_dim(self):
        return len(self.bounds)

    def pattern_matrix(self):
        """(k, d) float64 matrix ordered by class_id."""
        ordered = sorted(self.patterns, key=lambda p: p.class_id)
        return np.array([p.values for p in ordered], dtype=np.float64)

    def class_ids(self):
        return sorted(p.class_id for p in self.patterns)


def gen_primary_inputs(rng_seed):
    """Four 2-D patterns, one uniform point per quadrant."""
    rng = np.random.default_rng(rng_seed)
    patterns = []
    for cid in range(N_CLASSES):
        (rlo, rhi), (clo, chi) = QUADRANTS[cid]
        row = rlo + rng.random() * (rhi - rlo)
        col = clo + rng.random() * (chi - clo)
        patterns.append(Stimulus(np.array([row, col]), cid))
    return StimulusSet(patterns, [DOMAIN, DOMAIN], "primary", rng_seed)


def _draw_position(encoder_field, class_id, pairing_mode, rng):
    """Pick an encoding-neuron grid position, one rng.integers call.

    by_class draws from the class's encoder list when it is non-empty,
    falling back to the full encoder list; uniform always draws from the
    full list. Lists are in ascending row-major order.
    """
    positions = None
    if pairing_mode == PAIR_BY_CLASS:
        positions = encoder_field.class_positions(class_id)
    if not positions:
        positions = encoder_field.all_positions()
    if not positions:
        raise PropagationError("upstream map has no encoding neurons")
    return positions[int(rng.integers(len(positions)))]


def gen_assoc_inputs(prim1_field, prim2_field, pairing_mode=PAIR_BY_CLASS,
                     rng_seed=0):
    """Four 4-D patterns: a chosen encoder position from each primary map,
    concatenated; dims 0-1 come from the first map, dims 2-3 from the
    second."""
    _check_mode(pairing_mode)
    rng = np.random.default_rng(rng_seed)
    patterns = []
    for cid in range(N_CLASSES):
        r1 = _draw_position(prim1_field, cid, pairing_mode, rng)
        r2 = _draw_position(prim2_field, cid, pairing_mode, rng)
        patterns.append(Stimulus(np.array([*r1, *r2], dtype=np.float64), cid))
    bounds = [(0.0, float(prim1_field.height)),
              (0.0, float(prim1_field.width)),
              (0.0, float(prim2_field.height)),
              (0.0, float(prim2_field.width))]
    return StimulusSet(patterns, bounds, "assoc_derived", rng_seed)


def gen_front_inputs(assoc_field, pairing_mode=PAIR_BY_CLASS, rng_seed=0):
    """Four 2-D patterns: chosen encoder positions of the map below."""
    _check_mode(pairing_mode)
    rng = np.random.default_rng(rng_seed)
    patterns = []
    for cid in range(N_CLASSES):
        pos = _draw_position(assoc_field, cid, pairing_mode, rng)
        patterns.append(Stimulus(np.array(pos, dtype=np.float64), cid))
    bounds = [(0.0, float(assoc_field.height)),
              (0.0, float(assoc_field.width))]
    return StimulusSet(patterns, bounds, "front_derived", rng_seed)


def _check_mode(pairing_mode):
    if pairing_mode not in (PAIR_BY_CLASS, PAIR_UNIFORM):
        raise ConfigurationError(f"unknown pairing mode {pairing_mode!r}")

"""Staged development of the full three-level network.

Prim1 and Prim2 develop first on quadrant stimuli; their encoder fields
shape the Assoc inputs; the analyzed Assoc map shapes the Front inputs.
Projection disruption is a weakened learning rate on the corresponding
weight dimensions. All stage seeds derive deterministically from the
master seed.
"""

from __future__ import annotations

import copy
import hashlib
from dataclasses import dataclass, field

from .analysis import AnalysisConfig, analyze_map
from .core import (NO_PATHOLOGY, PathologySpec, TrainingConfig, init_map,
                   train)
from .exceptions import ConfigurationError, PropagationError
from .stimuli import (DOMAIN, PAIR_BY_CLASS, gen_assoc_inputs,
                      gen_front_inputs, gen_primary_inputs)

MAP_NAMES = ("prim1", "prim2", "assoc", "front")

PROJ_A = "A"    # prim1 -> assoc
PROJ_P2 = "P2"  # prim2 -> assoc
PROJ_B = "B"    # assoc -> front

DEFAULT_RATE = 0.5
DISRUPTED_RATE = 0.02

# Canonical imbalance combinations, row order of the case tables
CASE_COMBOS = (
    frozenset({"prim1", "prim2"}),
    frozenset({"assoc"}),
    frozenset({"front"}),
    frozenset({"assoc", "front"}),
    frozenset({"prim1", "prim2", "assoc"}),
    frozenset({"prim1", "prim2", "front"}),
    frozenset({"prim1", "prim2", "assoc", "front"}),
    frozenset({"prim1"}),
    frozenset({"prim1", "assoc"}),
    frozenset({"prim1", "front"}),
    frozenset({"prim1", "assoc", "front"}),
)


def combo_label(combo):
    order = {name: i for i, name in enumerate(MAP_NAMES)}
    return "+".join(sorted(combo, key=order.get))


@dataclass
class ProjectionSpec:
    id: str
    learning_rate: float = DEFAULT_RATE

    def __post_init__(self):
        if self.id not in (PROJ_A, PROJ_P2, PROJ_B):
            raise ConfigurationError(f"unknown projection {self.id!r}")
        if self.learning_rate <= 0:
            raise ConfigurationError("projection learning rate must be > 0")


@dataclass
class NetworkSpec:
    """Complete configuration of one network development."""

    master_seed: int = 0
    configs: dict = None      # map name -> TrainingConfig
    pathologies: dict = None  # map name -> PathologySpec
    projections: dict = None  # projection id -> ProjectionSpec
    pairing_mode: str = PAIR_BY_CLASS
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    def __post_init__(self):
        self.configs = dict(self.configs or {})
        self.pathologies = dict(self.pathologies or {})
        self.projections = dict(self.projections or {})
        for name in MAP_NAMES:
            self.configs.setdefault(name, TrainingConfig())
            self.pathologies.setdefault(name, NO_PATHOLOGY)
        for pid in (PROJ_A, PROJ_P2, PROJ_B):
            self.projections.setdefault(pid, ProjectionSpec(pid))

    def copy(self):
        return copy.deepcopy(self)


@dataclass
class NetworkResult:
    """Per-map outputs of one development, possibly partial."""

    spec: NetworkSpec
    maps: dict = field(default_factory=dict)      # name -> FeatureMap
    traces: dict = field(default_factory=dict)    # name -> TrainingTrace
    reports: dict = field(default_factory=dict)   # name -> MapReport
    stimulus_sets: dict = field(default_factory=dict)
    abort_stage: str = None

    def completed(self):
        return self.abort_stage is None


def stage_seed(master_seed, stage):
    """64-bit sub-seed, a stable hash of (master seed, stage name)."""
    digest = hashlib.sha256(f"{master_seed}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "little") & (2 ** 63 - 1)


def _train_stage(name, spec, stimuli, dim_groups, learning_rate):
    cfg = spec.configs[name]
    seed = stage_seed(spec.master_seed, f"{name}-train")
    cfg = TrainingConfig(
        learning_rate=learning_rate,
        sigma=cfg.sigma,
        steps=cfg.steps,
        snapshot_interval=cfg.snapshot_interval,
        rng_seed=seed,
        omega_includes_winner=cfg.omega_includes_winner,
    )
    fmap = init_map(20, 20, stimuli.input_dim, stimuli.bounds,
                    rng_seed=stage_seed(spec.master_seed, f"{name}-init"),
                    dim_groups=dim_groups)
    return train(fmap, stimuli, cfg, spec.pathologies[name])


def develop_network(spec):
    """Run the staged pipeline; a dead upstream map aborts the remaining
    stages and the result records where."""
    result = NetworkResult(spec=spec)

    for name in ("prim1", "prim2"):
        sset = gen_primary_inputs(stage_seed(spec.master_seed, f"{name}-stim"))
        fmap, trace = _train_stage(
            name, spec, sset, None, spec.configs[name].learning_rate)
        result.stimulus_sets[name] = sset
        result.maps[name] = fmap
        result.traces[name] = trace
        result.reports[name] = analyze_map(fmap, sset, spec.analysis, trace)

    try:
        assoc_stim = gen_assoc_inputs(
            result.reports["prim1"].encoder_field,
            result.reports["prim2"].encoder_field,
            spec.pairing_mode,
            stage_seed(spec.master_seed, "assoc-stim"))
    except PropagationError:
        result.abort_stage = "assoc"
        return result
    groups = {"prim1": (0, 1), "prim2": (2, 3)}
    rates = {"prim1": spec.projections[PROJ_A].learning_rate,
             "prim2": spec.projections[PROJ_P2].learning_rate}
    fmap, trace = _train_stage("assoc", spec, assoc_stim, groups, rates)
    result.stimulus_sets["assoc"] = assoc_stim
    result.maps["assoc"] = fmap
    result.traces["assoc"] = trace
    result.reports["assoc"] = analyze_map(fmap, assoc_stim, spec.analysis,
                                          trace)

    try:
        front_stim = gen_front_inputs(
            result.reports["assoc"].encoder_field,
            spec.pairing_mode,
            stage_seed(spec.master_seed, "front-stim"))
    except PropagationError:
        result.abort_stage = "front"
        return result
    rates = {"assoc": spec.projections[PROJ_B].learning_rate}
    fmap, trace = _train_stage("front", spec, front_stim, {"assoc": (0, 1)},
                               rates)
    result.stimulus_sets["front"] = front_stim
    result.maps["front"] = fmap
    result.traces["front"] = trace
    result.reports["front"] = analyze_map(fmap, front_stim, spec.analysis,
                                          trace)
    return result


def apply_case(spec, case, combo, omega=5.0):
    """Derive a case-matrix spec: disrupted projections per case plus
    over-strengthening on every map in the combo."""
    combo = frozenset(combo)
    if case not in (1, 2, 3):
        raise ConfigurationError(f"case must be 1, 2 or 3, got {case!r}")
    if combo not in CASE_COMBOS:
        raise ConfigurationError(
            f"combo {sorted(combo)} is not one of the canonical 11")
    out = spec.copy()
    if case in (1, 3):
        out.projections[PROJ_A] = ProjectionSpec(PROJ_A, DISRUPTED_RATE)
    if case in (2, 3):
        out.projections[PROJ_B] = ProjectionSpec(PROJ_B, DISRUPTED_RATE)
    for name in combo:
        out.pathologies[name] = PathologySpec.over_strengthen(omega)
    return out

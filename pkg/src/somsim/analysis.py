"""Map readout: encoding neurons, clusters, categorical final states and
putative symptoms.

A neuron encodes a stimulus class when its Gaussian activation for that
class reaches at least `theta` times the winner's activation. Connected
components of the encoder set (8-adjacency) at or above a minimum size
are clusters; smaller components are isolated encoders.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .exceptions import CalibrationError, ConfigurationError

DEFAULT_THETA = 0.999
# Frozen output of calibrate_activation(range(20)): mean normal-condition
# encoder count 250 +/- 2, inside the 200-300 target band.
DEFAULT_SIGMA_ACT = 3.134375
DEFAULT_MIN_CLUSTER_SIZE = 4
DEFAULT_FEW_ENCODER_MAX = 9
DEFAULT_LARGE_CLUSTER_FRACTION = 0.25

_ADJACENCY_8 = np.ones((3, 3), dtype=int)


@dataclass
class AnalysisConfig:
    """Readout thresholds, config-exposed."""

    theta: float = DEFAULT_THETA
    sigma_act: float = DEFAULT_SIGMA_ACT
    min_cluster_size: int = DEFAULT_MIN_CLUSTER_SIZE
    few_encoder_max: int = DEFAULT_FEW_ENCODER_MAX
    large_cluster_fraction: float = DEFAULT_LARGE_CLUSTER_FRACTION
    eps_stab: float = 0.05

    def __post_init__(self):
        if not (0 < self.theta <= 1):
            raise ConfigurationError("theta must be in (0, 1]")
        if self.sigma_act <= 0:
            raise ConfigurationError("sigma_act must be > 0")
        if self.min_cluster_size < 1:
            raise ConfigurationError("min_cluster_size must be >= 1")


@dataclass
class EncoderField:
    """Per-neuron encoded class sets over a grid."""

    width: int
    height: int
    class_masks: np.ndarray  # (n,) uint8 bitmask, bit k = encodes class k
    sigma_act: float
    theta: float

    def __post_init__(self):
        self.class_masks = np.asarray(self.class_masks, dtype=np.uint8)

    @property
    def n_neurons(self):
        return self.width * self.height

    def classes_of(self, index):
        mask = int(self.class_masks[index])
        return {k for k in range(8) if mask >> k & 1}

    def encoder_indices(self):
        return np.flatnonzero(self.class_masks)

    def total_encoders(self):
        return int(np.count_nonzero(self.class_masks))

    def all_positions(self):
        """Encoder (row, col) positions, ascending row-major."""
        return [divmod(int(i), self.width) for i in self.encoder_indices()]

    def class_positions(self, class_id):
        idx = np.flatnonzero(self.class_masks >> class_id & 1)
        return [divmod(int(i), self.width) for i in idx]

    def overlap_count(self):
        """Neurons encoding two or more classes."""
        counts = _popcount(self.class_masks)
        return int(np.count_nonzero(counts >= 2))

    def max_classes_per_neuron(self):
        counts = _popcount(self.class_masks)
        return int(counts.max()) if counts.size else 0


def _popcount(masks):
    return np.unpackbits(masks[:, None], axis=1).sum(axis=1)


@dataclass
class Cluster:
    """A connected component of encoding neurons."""

    members: list  # (row, col) positions, ascending row-major
    class_set: frozenset

    @property
    def size(self):
        return len(self.members)


@dataclass(frozen=True)
class MapStateCategory:
    """Categorical final state of a developed map."""

    tag: str
    n: int = None              # cluster / group / encoder count, tag-specific
    overlapping: bool = None

    def key(self):
        return (self.tag, self.n, self.overlapping)

    def label(self):
        parts = [self.tag]
        if self.n is not None:
            parts.append(str(self.n))
        if self.overlapping:
            parts.append("overlapping")
        return "/".join(parts)


WELL_ORGANIZED_4 = "WellOrganized4"
CLUSTERS_WITH_ISOLATED = "ClustersWithIsolated"
TENDENCY_TO = "TendencyTo"
CLUSTERS = "Clusters"
SINGLE_CLUSTER_OVERLAPPING = "SingleClusterOverlapping"
FEW_ENCODERS = "FewEncoders"
SINGLE_ENCODER = "SingleEncoder"
ABSENCE_OF_CLUSTERS = "AbsenceOfClusters"
PATTERNLESS = "Patternless"

NORMAL_COGNITION = "NormalCognition"
MILD_DAMAGE = "MildCognitiveDamage_MildRigidity"
MENTAL_RIGIDITY = "MentalRigidity"
MARKED_RIGIDITY = "MarkedMentalRigidity"
EXPRESSIVE_DAMAGE = "ExpressiveCognitiveDamage"
EXTREME_DAMAGE = "ExtremeCognitiveDamage"


@dataclass(frozen=True)
class PutativeSymptom:
    label: str
    extrapolated: bool = False


@dataclass
class MapReport:
    """Everything the experiments need to know about one developed map."""

    encoder_field: EncoderField
    clusters: list
    isolated: list  # sub-threshold components, also Cluster objects
    category: MapStateCategory
    stability: str = None  # 'stable' | 'unstable' | None
    overlap_count: int = 0
    max_classes_per_neuron: int = 0
    dominant_fraction: float = 0.0

    def total_encoders(self):
        return self.encoder_field.total_encoders()


def detect_encoders(fmap, stimuli, theta=DEFAULT_THETA,
                    sigma_act=DEFAULT_SIGMA_ACT):
    """Threshold per-class Gaussian activations against the winner's.

    The winner always encodes its class; when every activation underflows
    to zero only the winner does.
    """
    if not (0 < theta <= 1):
        raise ConfigurationError("theta must be in (0, 1]")
    if sigma_act <= 0:
        raise ConfigurationError("sigma_act must be > 0")
    masks = np.zeros(fmap.n_neurons, dtype=np.uint8)
    for pat in stimuli.patterns:
        d2 = ((fmap.weights - pat.values) ** 2).sum(axis=1)
        act = np.exp(-d2 / (2.0 * sigma_act * sigma_act))
        win = int(np.argmin(d2))
        bit = np.uint8(1 << pat.class_id)
        if act[win] > 0.0:
            masks[act >= theta * act[win]] |= bit
        masks[win] |= bit
    return EncoderField(fmap.width, fmap.height, masks, sigma_act, theta)


def extract_clusters(encoder_field, min_cluster_size=DEFAULT_MIN_CLUSTER_SIZE):
    """Split encoder components (8-adjacency) into clusters and isolated
    encoders by the size threshold."""
    if min_cluster_size < 1:
        raise ConfigurationError("min_cluster_size must be >= 1")
    h, w = encoder_field.height, encoder_field.width
    grid = encoder_field.class_masks.reshape(h, w)
    labels, count = ndimage.label(grid > 0, structure=_ADJACENCY_8)
    clusters, isolated = [], []
    for lab in range(1, count + 1):
        rows, cols = np.nonzero(labels == lab)
        members = sorted(zip(rows.tolist(), cols.tolist()))
        classes = frozenset(
            k for r, c in members
            for k in encoder_field.classes_of(r * w + c))
        comp = Cluster(members, classes)
        (clusters if comp.size >= min_cluster_size else isolated).append(comp)
    return clusters, isolated


def classify_state(encoder_field, clusters, isolated,
                   min_cluster_size=DEFAULT_MIN_CLUSTER_SIZE,
                   few_encoder_max=DEFAULT_FEW_ENCODER_MAX):
    """First-match decision cascade over the encoder/cluster structure."""
    total = encoder_field.total_encoders()
    overlapping = encoder_field.overlap_count() > 0
    ncl = len(clusters)
    if total == 0:
        return MapStateCategory(PATTERNLESS)
    if total == 1:
        return MapStateCategory(SINGLE_ENCODER, n=1, overlapping=overlapping)
    if total <= few_encoder_max and ncl == 0:
        return MapStateCategory(FEW_ENCODERS, n=total, overlapping=overlapping)
    if ncl == 4 and not overlapping and not isolated:
        return MapStateCategory(WELL_ORGANIZED_4, n=4, overlapping=False)
    if ncl == 4 and not overlapping:
        return MapStateCategory(CLUSTERS_WITH_ISOLATED, n=4, overlapping=False)
    if ncl == 1 and overlapping:
        return MapStateCategory(SINGLE_CLUSTER_OVERLAPPING, n=1,
                                overlapping=True)
    if ncl >= 1:
        return MapStateCategory(CLUSTERS, n=ncl, overlapping=overlapping)
    groups = {c.class_set for c in isolated}
    if len(groups) >= 2:
        return MapStateCategory(TENDENCY_TO, n=len(groups),
                                overlapping=overlapping)
    return MapStateCategory(ABSENCE_OF_CLUSTERS, n=total,
                            overlapping=overlapping)


def dominant_fraction(clusters, n_neurons):
    if not clusters or n_neurons == 0:
        return 0.0
    return max(c.size for c in clusters) / n_neurons


def analyze_map(fmap, stimuli, cfg=None, trace=None):
    """Full readout of a trained map; the stability verdict is attached
    when a trace is given."""
    from .core import stability_verdict

    cfg = cfg or AnalysisConfig()
    fieldv = detect_encoders(fmap, stimuli, cfg.theta, cfg.sigma_act)
    clusters, isolated = extract_clusters(fieldv, cfg.min_cluster_size)
    category = classify_state(fieldv, clusters, isolated,
                              cfg.min_cluster_size, cfg.few_encoder_max)
    stability = None
    if trace is not None and len(trace.snapshots) >= 3:
        stability = stability_verdict(
            trace, cluster_signature_fn(fmap, stimuli, cfg), cfg.eps_stab)
    return MapReport(
        encoder_field=fieldv,
        clusters=clusters,
        isolated=isolated,
        category=category,
        stability=stability,
        overlap_count=fieldv.overlap_count(),
        max_classes_per_neuron=fieldv.max_classes_per_neuron(),
        dominant_fraction=dominant_fraction(clusters, fieldv.n_neurons),
    )


def cluster_signature_fn(fmap, stimuli, cfg):
    """Categorical cluster signature of a weight snapshot: cluster count
    plus the sorted per-cluster class sets."""
    shell = fmap.copy()

    def signature(weights):
        shell.weights = np.ascontiguousarray(weights)
        fieldv = detect_encoders(shell, stimuli, cfg.theta, cfg.sigma_act)
        clusters, _ = extract_clusters(fieldv, cfg.min_cluster_size)
        return (len(clusters),
                tuple(sorted(tuple(sorted(c.class_set)) for c in clusters)))

    return signature


# Explicit rows of the category -> symptom lookup; anything outside them
# is classified by the nearest rule and flagged extrapolated.
def symptom_of(category, dominant_frac=0.0,
               large_cluster_fraction=DEFAULT_LARGE_CLUSTER_FRACTION,
               max_classes=0):
    tag, n, over = category.tag, category.n, bool(category.overlapping)
    enlarged = dominant_frac >= large_cluster_fraction

    if tag == WELL_ORGANIZED_4:
        return PutativeSymptom(NORMAL_COGNITION)
    if tag == CLUSTERS_WITH_ISOLATED and n == 4:
        return PutativeSymptom(NORMAL_COGNITION)
    if tag == CLUSTERS and n == 3 and over and max_classes <= 2 \
            and not enlarged:
        return PutativeSymptom(MILD_DAMAGE)
    if tag == CLUSTERS and n == 3 and over and max_classes <= 2 and enlarged:
        return PutativeSymptom(MENTAL_RIGIDITY)
    if tag == CLUSTERS and n == 2 and over and max_classes >= 3 and enlarged:
        return PutativeSymptom(MENTAL_RIGIDITY)
    if tag == SINGLE_CLUSTER_OVERLAPPING:
        return PutativeSymptom(MARKED_RIGIDITY)
    if tag == TENDENCY_TO and n == 2 and over and max_classes >= 3:
        return PutativeSymptom(MARKED_RIGIDITY)
    if tag == TENDENCY_TO and n in (3, 4) and over:
        return PutativeSymptom(EXPRESSIVE_DAMAGE)
    if tag == SINGLE_ENCODER:
        return PutativeSymptom(EXTREME_DAMAGE)
    if tag == FEW_ENCODERS and n == 2 and max_classes >= 3:
        return PutativeSymptom(EXTREME_DAMAGE)

    # nearest-rule extrapolation
    if tag in (PATTERNLESS, FEW_ENCODERS, ABSENCE_OF_CLUSTERS):
        return PutativeSymptom(EXTREME_DAMAGE, extrapolated=True)
    if tag == TENDENCY_TO:
        label = MARKED_RIGIDITY if n == 2 else EXPRESSIVE_DAMAGE
        return PutativeSymptom(label, extrapolated=True)
    if tag == CLUSTERS_WITH_ISOLATED:
        return PutativeSymptom(NORMAL_COGNITION, extrapolated=True)
    if tag == CLUSTERS:
        if n is not None and n >= 4:
            label = MILD_DAMAGE if over else NORMAL_COGNITION
        elif n == 3:
            label = MENTAL_RIGIDITY if enlarged else MILD_DAMAGE
        elif n == 2:
            label = MENTAL_RIGIDITY
        else:
            label = MARKED_RIGIDITY
        return PutativeSymptom(label, extrapolated=True)
    return PutativeSymptom(EXPRESSIVE_DAMAGE, extrapolated=True)


def calibrate_activation(seeds, target_range=(200, 300), bracket=(0.01, 50.0),
                         theta=DEFAULT_THETA, max_iter=60):
    """Bisection on the activation scale so that the mean encoder count of
    normal-condition maps lands inside target_range.

    Maps are trained once per seed and re-read at each candidate scale.
    Returns the calibrated sigma_act.
    """
    from .core import TrainingConfig, init_map, train
    from .stimuli import DOMAIN, gen_primary_inputs

    if len(seeds) < 10:
        raise ConfigurationError("calibration needs at least 10 seeds")
    lo_t, hi_t = target_range
    target_mid = 0.5 * (lo_t + hi_t)

    trained = []
    for seed in seeds:
        sset = gen_primary_inputs(seed)
        fmap = init_map(20, 20, 2, [DOMAIN, DOMAIN], rng_seed=seed + 1)
        fmap, _ = train(fmap, sset, TrainingConfig(rng_seed=seed + 2))
        trained.append((fmap, sset))

    def mean_count(sigma_act):
        counts = [detect_encoders(m, s, theta, sigma_act).total_encoders()
                  for m, s in trained]
        return float(np.mean(counts))

    lo, hi = bracket
    c_lo, c_hi = mean_count(lo), mean_count(hi)
    if not (c_lo <= target_mid <= c_hi):
        raise CalibrationError(
            f"bracket {bracket} does not contain the target: "
            f"counts ({c_lo}, {c_hi}) vs target {target_mid}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        c_mid = mean_count(mid)
        if lo_t <= c_mid <= hi_t and abs(c_mid - target_mid) <= 2.0:
            return mid
        if c_mid < target_mid:
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    if lo_t <= mean_count(mid) <= hi_t:
        return mid
    raise CalibrationError("bisection failed to reach the target range")

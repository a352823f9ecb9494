"""Map readout: encoder detection, cluster extraction against a flood-fill
oracle, the categorical cascade, symptom lookup and calibration."""

import numpy as np
import pytest

from conftest import flood_fill_components
from somsim.analysis import (ABSENCE_OF_CLUSTERS, CLUSTERS,
                             CLUSTERS_WITH_ISOLATED, EXPRESSIVE_DAMAGE,
                             EXTREME_DAMAGE, FEW_ENCODERS, MARKED_RIGIDITY,
                             MENTAL_RIGIDITY, MILD_DAMAGE, NORMAL_COGNITION,
                             PATTERNLESS, SINGLE_CLUSTER_OVERLAPPING,
                             SINGLE_ENCODER, TENDENCY_TO, WELL_ORGANIZED_4,
                             AnalysisConfig, EncoderField, MapStateCategory,
                             analyze_map, calibrate_activation,
                             classify_state, detect_encoders,
                             dominant_fraction, extract_clusters, symptom_of)
from somsim.core import FeatureMap, TrainingConfig, init_map, train
from somsim.exceptions import CalibrationError, ConfigurationError
from somsim.stimuli import DOMAIN, gen_primary_inputs


def _field_from_masks(masks, width=20, height=20):
    return EncoderField(width, height,
                        np.asarray(masks, dtype=np.uint8).ravel(),
                        sigma_act=3.0, theta=0.999)


def _random_field(rng, width=8, height=8, p=0.3):
    masks = np.zeros(width * height, dtype=np.uint8)
    on = rng.random(masks.shape) < p
    masks[on] = rng.integers(1, 16, size=int(on.sum()), dtype=np.uint8)
    return _field_from_masks(masks, width, height)


# ---------------------------------------------------------------------------
# detect_encoders

def _trained_map(seed=0):
    sset = gen_primary_inputs(seed)
    m = init_map(20, 20, 2, [DOMAIN, DOMAIN], rng_seed=seed + 1)
    m, _ = train(m, sset, TrainingConfig(rng_seed=seed + 2))
    return m, sset


def test_theta_one_only_winners():
    m, sset = _trained_map()
    f = detect_encoders(m, sset, theta=1.0, sigma_act=3.0)
    # per class: the winner plus exact activation ties only
    for pat in sset.patterns:
        d2 = ((m.weights - pat.values) ** 2).sum(axis=1)
        act = np.exp(-d2 / (2.0 * 3.0 * 3.0))
        ties = int((act == act[np.argmin(d2)]).sum())
        assert len(f.class_positions(pat.class_id)) == ties


def test_theta_to_zero_everyone_encodes():
    m, sset = _trained_map()
    f = detect_encoders(m, sset, theta=1e-300, sigma_act=10.0)
    assert f.total_encoders() == m.n_neurons


def test_winner_always_included_even_when_activation_underflows():
    # distances so large that exp() underflows to zero everywhere
    m = FeatureMap(4, 4, 2, np.full((16, 2), 1e6))
    m.weights[5] = [0.0, 0.0]
    from somsim.stimuli import Stimulus, StimulusSet
    sset = StimulusSet([Stimulus([1.0, 1.0], 0)], [(0.0, 2e6), (0.0, 2e6)])
    f = detect_encoders(m, sset, theta=0.999, sigma_act=0.01)
    assert f.class_positions(0) == [(1, 1)]


def test_theta_monotonicity(rng):
    m, sset = _trained_map(3)
    thetas = sorted(rng.random(20) * 0.999 + 0.0005)
    counts = [detect_encoders(m, sset, theta=t, sigma_act=3.0)
              .total_encoders() for t in thetas]
    assert all(a >= b for a, b in zip(counts, counts[1:]))


def test_sigma_act_monotonicity(rng):
    m, sset = _trained_map(4)
    scales = sorted(rng.random(15) * 30 + 0.1)
    counts = [detect_encoders(m, sset, theta=0.999, sigma_act=s)
              .total_encoders() for s in scales]
    assert all(a <= b for a, b in zip(counts, counts[1:]))


def test_detect_encoders_validation():
    m, sset = _trained_map(5)
    with pytest.raises(ConfigurationError):
        detect_encoders(m, sset, theta=0.0)
    with pytest.raises(ConfigurationError):
        detect_encoders(m, sset, sigma_act=-1.0)


# ---------------------------------------------------------------------------
# extract_clusters

def test_empty_field():
    f = _field_from_masks(np.zeros(400))
    clusters, isolated = extract_clusters(f)
    assert clusters == [] and isolated == []


def test_solid_block_single_cluster():
    masks = np.zeros((20, 20), dtype=np.uint8)
    masks[3:8, 4:9] = 1
    clusters, isolated = extract_clusters(_field_from_masks(masks))
    assert len(clusters) == 1 and not isolated
    assert clusters[0].size == 25
    assert clusters[0].class_set == frozenset({0})


def test_diagonal_adjacency_merges():
    masks = np.zeros((20, 20), dtype=np.uint8)
    for i in range(5):
        masks[i, i] = 1 << (i % 4)
    clusters, isolated = extract_clusters(_field_from_masks(masks))
    assert len(clusters) == 1
    assert clusters[0].class_set == frozenset({0, 1, 2, 3})


def test_flood_fill_oracle_1000_fields(rng):
    for _ in range(1000):
        f = _random_field(rng)
        clusters, isolated = extract_clusters(f, min_cluster_size=3)
        grid = f.class_masks.reshape(f.height, f.width) > 0
        want = flood_fill_components(grid)
        got = sorted([c.members for c in clusters] +
                     [c.members for c in isolated])
        assert got == want
        for comp in clusters:
            assert comp.size >= 3
        for comp in isolated:
            assert comp.size < 3


def test_partition_law(rng):
    for _ in range(200):
        f = _random_field(rng, 10, 10)
        clusters, isolated = extract_clusters(f)
        covered = [pos for c in clusters + isolated for pos in c.members]
        assert len(covered) == len(set(covered)) == f.total_encoders()
        encoder_pos = set(f.all_positions())
        assert set(covered) == encoder_pos


# ---------------------------------------------------------------------------
# classify_state

def _classify(field, min_size=4, few_max=9):
    clusters, isolated = extract_clusters(field, min_size)
    return classify_state(field, clusters, isolated, min_size, few_max)


def test_classification_examples():
    # 4 disjoint single-class blocks -> well organized
    masks = np.zeros((20, 20), dtype=np.uint8)
    for cid, (r, c) in enumerate([(2, 2), (2, 12), (12, 2), (12, 12)]):
        masks[r:r + 3, c:c + 3] = 1 << cid
    assert _classify(_field_from_masks(masks)).tag == WELL_ORGANIZED_4

    # plus a far-away stray encoder -> clusters with isolated
    masks[19, 0] = 1
    assert _classify(_field_from_masks(masks)).tag == CLUSTERS_WITH_ISOLATED

    # single encoder with all four classes
    masks = np.zeros((20, 20), dtype=np.uint8)
    masks[5, 5] = 0b1111
    cat = _classify(_field_from_masks(masks))
    assert cat.tag == SINGLE_ENCODER and cat.overlapping

    # empty
    assert _classify(_field_from_masks(np.zeros((20, 20)))).tag == PATTERNLESS

    # few scattered encoders, no clusters
    masks = np.zeros((20, 20), dtype=np.uint8)
    for i, (r, c) in enumerate([(0, 0), (5, 9), (10, 3), (16, 16), (3, 15)]):
        masks[r, c] = 1 << (i % 4)
    cat = _classify(_field_from_masks(masks))
    assert cat.tag == FEW_ENCODERS and cat.n == 5

    # one big multi-class cluster
    masks = np.zeros((20, 20), dtype=np.uint8)
    masks[5:9, 5:9] = 1
    masks[6, 6] = 0b11
    cat = _classify(_field_from_masks(masks))
    assert cat.tag == SINGLE_CLUSTER_OVERLAPPING

    # two clusters, one overlapping neuron
    masks = np.zeros((20, 20), dtype=np.uint8)
    masks[1:4, 1:4] = 1
    masks[10:13, 10:13] = 2
    masks[1, 1] = 0b101
    cat = _classify(_field_from_masks(masks))
    assert cat.tag == CLUSTERS and cat.n == 2 and cat.overlapping

    # many sub-threshold single-class groups -> tendency (the few-encoder
    # rule only captures totals at or below its maximum)
    masks = np.zeros((20, 20), dtype=np.uint8)
    for cid, (r, c) in enumerate([(0, 0), (0, 10), (10, 0), (10, 10)]):
        masks[r, c:c + 3] = 1 << cid
    cat = _classify(_field_from_masks(masks))
    assert cat.tag == TENDENCY_TO and cat.n == 4


def test_classification_totality_fuzz(rng):
    tags = {WELL_ORGANIZED_4, CLUSTERS_WITH_ISOLATED, TENDENCY_TO, CLUSTERS,
            SINGLE_CLUSTER_OVERLAPPING, FEW_ENCODERS, SINGLE_ENCODER,
            ABSENCE_OF_CLUSTERS, PATTERNLESS}
    for _ in range(1000):
        f = _random_field(rng, 8, 8, p=float(rng.random() * 0.6))
        cat = _classify(f, min_size=int(rng.integers(1, 6)),
                        few_max=int(rng.integers(1, 15)))
        assert cat.tag in tags
        if cat.tag == SINGLE_ENCODER:
            assert f.total_encoders() == 1
        if cat.tag == PATTERNLESS:
            assert f.total_encoders() == 0


def test_dominant_fraction():
    masks = np.zeros((20, 20), dtype=np.uint8)
    masks[0:10, 0:10] = 1
    clusters, _ = extract_clusters(_field_from_masks(masks))
    assert dominant_fraction(clusters, 400) == pytest.approx(0.25)
    assert dominant_fraction([], 400) == 0.0


# ---------------------------------------------------------------------------
# symptom lookup

def _cat(tag, n=None, over=None):
    return MapStateCategory(tag, n=n, overlapping=over)


def test_symptom_table_rows():
    assert symptom_of(_cat(WELL_ORGANIZED_4, 4, False)).label == \
        NORMAL_COGNITION
    assert symptom_of(_cat(CLUSTERS_WITH_ISOLATED, 4, False)).label == \
        NORMAL_COGNITION
    s = symptom_of(_cat(CLUSTERS, 3, True), dominant_frac=0.1, max_classes=2)
    assert (s.label, s.extrapolated) == (MILD_DAMAGE, False)
    s = symptom_of(_cat(CLUSTERS, 3, True), dominant_frac=0.4, max_classes=2)
    assert (s.label, s.extrapolated) == (MENTAL_RIGIDITY, False)
    s = symptom_of(_cat(CLUSTERS, 2, True), dominant_frac=0.46, max_classes=3)
    assert (s.label, s.extrapolated) == (MENTAL_RIGIDITY, False)
    assert symptom_of(_cat(SINGLE_CLUSTER_OVERLAPPING, 1, True)).label == \
        MARKED_RIGIDITY
    s = symptom_of(_cat(TENDENCY_TO, 2, True), max_classes=3)
    assert (s.label, s.extrapolated) == (MARKED_RIGIDITY, False)
    s = symptom_of(_cat(TENDENCY_TO, 3, True))
    assert (s.label, s.extrapolated) == (EXPRESSIVE_DAMAGE, False)
    assert symptom_of(_cat(SINGLE_ENCODER, 1, True)).label == EXTREME_DAMAGE
    s = symptom_of(_cat(FEW_ENCODERS, 2, True), max_classes=3)
    assert (s.label, s.extrapolated) == (EXTREME_DAMAGE, False)


def test_symptom_extrapolation_flagged():
    s = symptom_of(_cat(FEW_ENCODERS, 7, False))
    assert s.extrapolated
    s = symptom_of(_cat(CLUSTERS, 5, False))
    assert s.extrapolated
    s = symptom_of(_cat(PATTERNLESS))
    assert s.extrapolated and s.label == EXTREME_DAMAGE


def test_symptom_purity():
    a = symptom_of(_cat(CLUSTERS, 3, True), 0.4, max_classes=2)
    b = symptom_of(_cat(CLUSTERS, 3, True), 0.4, max_classes=2)
    assert a == b


# ---------------------------------------------------------------------------
# analyze_map integration

def test_analyze_map_consistency():
    sset = gen_primary_inputs(11)
    m = init_map(20, 20, 2, [DOMAIN, DOMAIN], rng_seed=12)
    m, trace = train(m, sset, TrainingConfig(rng_seed=13))
    rep = analyze_map(m, sset, AnalysisConfig(), trace)
    assert rep.total_encoders() == \
        sum(c.size for c in rep.clusters) + sum(c.size for c in rep.isolated)
    assert rep.stability in ("stable", "unstable")
    assert 0.0 <= rep.dominant_fraction <= 1.0
    assert rep.category.tag


# ---------------------------------------------------------------------------
# calibration

def test_calibration_bracket_and_result():
    sigma_act = calibrate_activation(list(range(10)))
    assert 0.01 < sigma_act < 50.0
    sset = gen_primary_inputs(0)
    m = init_map(20, 20, 2, [DOMAIN, DOMAIN], rng_seed=1)
    m, _ = train(m, sset, TrainingConfig(rng_seed=2))
    # single-map count at the calibrated scale is in a sane neighborhood
    count = detect_encoders(m, sset, sigma_act=sigma_act).total_encoders()
    assert 100 <= count <= 400


def test_calibration_requires_ten_seeds():
    with pytest.raises(ConfigurationError):
        calibrate_activation([1, 2, 3])


def test_calibration_bad_bracket():
    with pytest.raises(CalibrationError):
        calibrate_activation(list(range(10)), target_range=(200, 300),
                             bracket=(1e-6, 2e-6))

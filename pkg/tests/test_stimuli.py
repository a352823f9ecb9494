"""Stimulus construction: quadrant primaries, encoder-position-derived
higher-level sets, pairing modes and the draw protocol."""

import numpy as np
import pytest

from somsim.analysis import EncoderField
from somsim.exceptions import ConfigurationError, PropagationError
from somsim.stimuli import (DOMAIN, N_CLASSES, PAIR_BY_CLASS, PAIR_UNIFORM,
                            QUADRANTS, Stimulus, StimulusSet,
                            gen_assoc_inputs, gen_front_inputs,
                            gen_primary_inputs)


def _field(width=20, height=20, class_pos=None):
    """Build an EncoderField from {class_id: [(r, c), ...]}."""
    masks = np.zeros(width * height, dtype=np.uint8)
    for cid, positions in (class_pos or {}).items():
        for r, c in positions:
            masks[r * width + c] |= 1 << cid
    return EncoderField(width, height, masks, sigma_act=3.0, theta=0.999)


# ---------------------------------------------------------------------------
# primary sets

def test_primary_quadrant_membership():
    for seed in range(200):
        sset = gen_primary_inputs(seed)
        assert len(sset.patterns) == N_CLASSES
        for pat in sset.patterns:
            (rlo, rhi), (clo, chi) = QUADRANTS[pat.class_id]
            r, c = pat.values
            assert rlo <= r < rhi and clo <= c < chi


def test_primary_deterministic():
    a = gen_primary_inputs(77)
    b = gen_primary_inputs(77)
    np.testing.assert_array_equal(a.pattern_matrix(), b.pattern_matrix())
    c = gen_primary_inputs(78)
    assert not np.array_equal(a.pattern_matrix(), c.pattern_matrix())


def test_pattern_matrix_class_order():
    sset = gen_primary_inputs(0)
    sset.patterns.reverse()
    mat = sset.pattern_matrix()
    for cid in range(N_CLASSES):
        pat = next(p for p in sset.patterns if p.class_id == cid)
        np.testing.assert_array_equal(mat[cid], pat.values)


# ---------------------------------------------------------------------------
# validation

def test_duplicate_class_rejected():
    pats = [Stimulus([1.0, 1.0], 0), Stimulus([2.0, 2.0], 0)]
    with pytest.raises(ConfigurationError):
        StimulusSet(pats, [DOMAIN, DOMAIN])


def test_out_of_bounds_rejected():
    with pytest.raises(ConfigurationError):
        StimulusSet([Stimulus([25.0, 1.0], 0)], [DOMAIN, DOMAIN])
    with pytest.raises(ConfigurationError):
        StimulusSet([Stimulus([20.0, 1.0], 0)], [DOMAIN, DOMAIN])
    StimulusSet([Stimulus([0.0, 19.999], 0)], [DOMAIN, DOMAIN])  # ok


def test_inconsistent_dims_rejected():
    pats = [Stimulus([1.0, 1.0], 0), Stimulus([1.0, 1.0, 1.0], 1)]
    with pytest.raises(ConfigurationError):
        StimulusSet(pats, [DOMAIN, DOMAIN])


def test_unknown_pairing_mode_rejected():
    f = _field(class_pos={0: [(1, 1)], 1: [(2, 2)], 2: [(3, 3)], 3: [(4, 4)]})
    with pytest.raises(ConfigurationError):
        gen_front_inputs(f, "banana", 0)


# ---------------------------------------------------------------------------
# higher-level sets

def _full_field():
    return _field(class_pos={
        0: [(1, 1), (1, 2)], 1: [(2, 5)], 2: [(9, 3)], 3: [(15, 15)]})


def test_assoc_concatenation_and_bounds():
    f1, f2 = _full_field(), _full_field()
    sset = gen_assoc_inputs(f1, f2, PAIR_BY_CLASS, rng_seed=1)
    assert sset.input_dim == 4
    assert sset.bounds == [(0.0, 20.0)] * 4
    for pat in sset.patterns:
        assert tuple(pat.values[:2]) in f1.class_positions(pat.class_id)
        assert tuple(pat.values[2:]) in f2.class_positions(pat.class_id)


def test_front_positions_from_class():
    f = _full_field()
    sset = gen_front_inputs(f, PAIR_BY_CLASS, rng_seed=2)
    assert sset.input_dim == 2
    for pat in sset.patterns:
        assert tuple(pat.values) in f.class_positions(pat.class_id)


def test_by_class_falls_back_to_all_encoders():
    # class 2 has no encoders; its draw must come from the full list
    f = _field(class_pos={0: [(1, 1)], 1: [(2, 2)], 3: [(3, 3)]})
    sset = gen_front_inputs(f, PAIR_BY_CLASS, rng_seed=3)
    pat = next(p for p in sset.patterns if p.class_id == 2)
    assert tuple(pat.values) in f.all_positions()


def test_zero_encoders_raise_propagation_error():
    empty = _field()
    with pytest.raises(PropagationError):
        gen_front_inputs(empty, PAIR_BY_CLASS, rng_seed=0)
    with pytest.raises(PropagationError):
        gen_assoc_inputs(empty, _full_field(), PAIR_BY_CLASS, rng_seed=0)


def test_uniform_mode_draw_protocol_oracle():
    """uniform mode draws one rng.integers(len(all)) per class, class order
    0..3, prim1 before prim2 — replayable with a fresh rng."""
    f1, f2 = _full_field(), _full_field()
    seed = 99
    sset = gen_assoc_inputs(f1, f2, PAIR_UNIFORM, rng_seed=seed)
    rng = np.random.default_rng(seed)
    all1, all2 = f1.all_positions(), f2.all_positions()
    for cid in range(N_CLASSES):
        want1 = all1[int(rng.integers(len(all1)))]
        want2 = all2[int(rng.integers(len(all2)))]
        pat = next(p for p in sset.patterns if p.class_id == cid)
        assert tuple(pat.values[:2]) == want1
        assert tuple(pat.values[2:]) == want2


def test_by_class_draw_protocol_oracle():
    f = _full_field()
    seed = 4
    sset = gen_front_inputs(f, PAIR_BY_CLASS, rng_seed=seed)
    rng = np.random.default_rng(seed)
    for cid in range(N_CLASSES):
        positions = f.class_positions(cid)
        want = positions[int(rng.integers(len(positions)))]
        pat = next(p for p in sset.patterns if p.class_id == cid)
        assert tuple(pat.values) == want


def test_positions_ascending_row_major():
    f = _full_field()
    assert f.all_positions() == sorted(f.all_positions())
    for cid in range(N_CLASSES):
        pos = f.class_positions(cid)
        assert pos == sorted(pos)

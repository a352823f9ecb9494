"""Shared test helpers: deliberately naive reference implementations used
as independent oracles against the optimized code paths."""

import math

import numpy as np
import pytest

from somsim.core import FeatureMap, TrainingConfig, init_map
from somsim.stimuli import DOMAIN, StimulusSet, Stimulus


def naive_winner(fmap, x):
    """Exhaustive scan, ties to the lowest row-major index."""
    best, best_d2 = 0, float("inf")
    for i in range(fmap.n_neurons):
        d2 = sum((float(w) - float(v)) ** 2
                 for w, v in zip(fmap.weights[i], x))
        if d2 < best_d2:
            best, best_d2 = i, d2
    return divmod(best, fmap.width)


def naive_update(fmap, x, cfg, mode="none", omega=None, c=None,
                 sigma_override=None, include_winner=False):
    """Slow per-neuron reference of one presentation. Pure Python loops,
    no shared code with the kernels."""
    sigma = sigma_override if sigma_override is not None else cfg.sigma
    wr, wc = naive_winner(fmap, x)
    rho = cfg.rho_vector(fmap)
    new = fmap.weights.copy()
    for i in range(fmap.n_neurons):
        r, col = divmod(i, fmap.width)
        d2 = (r - wr) ** 2 + (col - wc) ** 2
        phi = math.exp(-d2 / (2.0 * sigma * sigma))
        if mode == "none":
            scale = phi
        elif mode == "over_strengthen":
            is_winner = (r, col) == (wr, wc)
            scale = phi if (is_winner and not include_winner) else omega * phi
        elif mode == "increase_factor":
            scale = phi / (c - phi)
        else:
            raise ValueError(mode)
        for d in range(fmap.input_dim):
            m = scale * rho[d]
            new[i, d] = new[i, d] + m * (x[d] - new[i, d])
    return new


def flood_fill_components(mask_grid):
    """Brute-force 8-adjacency connected components of a boolean grid.

    Returns a list of sorted member-position lists.
    """
    h, w = mask_grid.shape
    seen = np.zeros_like(mask_grid, dtype=bool)
    comps = []
    for r in range(h):
        for c in range(w):
            if not mask_grid[r, c] or seen[r, c]:
                continue
            stack, members = [(r, c)], []
            seen[r, c] = True
            while stack:
                cr, cc = stack.pop()
                members.append((cr, cc))
                for dr in (-1, 0, 1):
                    for dc in (-1, 0, 1):
                        nr, nc = cr + dr, cc + dc
                        if (0 <= nr < h and 0 <= nc < w
                                and mask_grid[nr, nc] and not seen[nr, nc]):
                            seen[nr, nc] = True
                            stack.append((nr, nc))
            comps.append(sorted(members))
    return sorted(comps)


def random_map(rng, width=3, height=3, input_dim=2, lo=0.0, hi=20.0):
    weights = lo + rng.random((width * height, input_dim)) * (hi - lo)
    return FeatureMap(width, height, input_dim, weights)


def quadrant_set(seed=0):
    from somsim.stimuli import gen_primary_inputs
    return gen_primary_inputs(seed)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# One verdict line per acceptance criterion, echoed after the test run so
# they survive output capture.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

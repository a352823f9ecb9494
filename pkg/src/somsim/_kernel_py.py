"""Pure-numpy training kernel.

Fallback used when the compiled extension is unavailable. Both kernels
perform the identical sequence of IEEE double operations, so trajectories
are bit-identical across backends.
"""

import numpy as np

MODE_NONE = 0
MODE_OVER_STRENGTHEN = 1
MODE_INCREASE_FACTOR = 2


def run_training(weights, phi, stimuli, order, rho, mode, factor, cval,
                 include_winner, snap_steps):
    """Run the competitive-learning loop and collect snapshots.

    weights       (n, d) float64, modified in place
    phi           (n, n) float64, phi[w, i] = neighborhood weight of neuron i
                  when neuron w wins (precomputed for the effective sigma)
    stimuli       (k, d) float64 input patterns
    order         (steps,) int64 pattern index presented at each step
    rho           (d,) float64 per-dimension learning rate
    mode          one of the MODE_* constants
    factor        over-strengthening multiplier (mode 1)
    cval          increase-factor constant C (mode 2)
    include_winner  apply the multiplier to the winner too (mode 1)
    snap_steps    ascending 1-based step indices at which to snapshot;
                  must end with len(order)

    Returns (snaps, winners) where snaps is (len(snap_steps), n, d) and
    winners is the per-step winner index (for instrumentation).
    """
    n, d = weights.shape
    steps = order.shape[0]
    snaps = np.empty((len(snap_steps), n, d), dtype=np.float64)
    winners = np.empty(steps, dtype=np.int64)
    next_snap = 0
    for s in range(steps):
        x = stimuli[order[s]]
        d2 = ((weights - x) ** 2).sum(axis=1)
        win = int(np.argmin(d2))  # first minimum = lowest row-major index
        winners[s] = win
        p = phi[win]
        if mode == MODE_NONE:
            scale = p
        elif mode == MODE_OVER_STRENGTHEN:
            scale = factor * p
            if not include_winner:
                scale[win] = p[win]
        else:
            scale = p / (cval - p)
        weights += (scale[:, None] * rho[None, :]) * (x - weights)
        if next_snap < len(snap_steps) and s + 1 == snap_steps[next_snap]:
            snaps[next_snap] = weights
            next_snap += 1
    return snaps, winners

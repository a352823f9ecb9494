# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled training kernel.

Performs the same sequence of IEEE double operations as the numpy
fallback in _kernel_py, so both backends produce bit-identical
trajectories for the same inputs.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

MODE_NONE = 0
MODE_OVER_STRENGTHEN = 1
MODE_INCREASE_FACTOR = 2


def run_training(cnp.float64_t[:, ::1] weights,
                 cnp.float64_t[:, ::1] phi,
                 cnp.float64_t[:, ::1] stimuli,
                 cnp.int64_t[::1] order,
                 cnp.float64_t[::1] rho,
                 int mode,
                 double factor,
                 double cval,
                 bint include_winner,
                 cnp.int64_t[::1] snap_steps):
    """See somsim._kernel_py.run_training for the argument contract."""
    cdef Py_ssize_t n = weights.shape[0]
    cdef Py_ssize_t d = weights.shape[1]
    cdef Py_ssize_t steps = order.shape[0]
    cdef Py_ssize_t nsnap = snap_steps.shape[0]

    snaps_arr = np.empty((nsnap, n, d), dtype=np.float64)
    winners_arr = np.empty(steps, dtype=np.int64)
    cdef cnp.float64_t[:, :, ::1] snaps = snaps_arr
    cdef cnp.int64_t[::1] winners = winners_arr

    cdef Py_ssize_t s, i, j, win, next_snap = 0
    cdef double acc, diff, best, sc, m

    for s in range(steps):
        x = stimuli[order[s]]
        win = 0
        best = 0.0
        for i in range(n):
            acc = 0.0
            for j in range(d):
                diff = weights[i, j] - x[j]
                acc += diff * diff
            if i == 0 or acc < best:
                best = acc
                win = i
        winners[s] = win
        for i in range(n):
            sc = phi[win, i]
            if mode == MODE_OVER_STRENGTHEN:
                if include_winner or i != win:
                    sc = factor * sc
            elif mode == MODE_INCREASE_FACTOR:
                sc = sc / (cval - sc)
            for j in range(d):
                m = sc * rho[j]
                weights[i, j] = weights[i, j] + m * (x[j] - weights[i, j])
        if next_snap < nsnap and s + 1 == snap_steps[next_snap]:
            for i in range(n):
                for j in range(d):
                    snaps[next_snap, i, j] = weights[i, j]
            next_snap += 1
    return snaps_arr, winners_arr

"""Compiled multi-agent step loops.

Both kernels run ``steps`` global steps; within a step agents move in array
order, so a later agent's paint overwrites an earlier one's on collision.
Direction codes follow ``walk.Direction`` (R, D, L, U = 0..3).
"""

import numba
import numpy as np

_DR = np.array([0, 1, 0, -1], dtype=np.int64)
_DC = np.array([1, 0, -1, 0], dtype=np.int64)


@numba.njit(cache=True, nogil=True)
def rotor_steps(steps, canvas, painted, targets, seqs, seq_lens, counters, pos, census):
    m = canvas.shape[0]
    n = canvas.shape[1]
    k_agents = pos.shape[0]
    for _ in range(steps):
        for k in range(k_agents):
            r = pos[k, 0]
            c = pos[k, 1]
            idx = counters[k, r, c]
            d = seqs[k, idx]
            nr = r + _DR[d]
            nc = c + _DC[d]
            if nr == m:
                nr = 0
            elif nr < 0:
                nr = m - 1
            if nc == n:
                nc = 0
            elif nc < 0:
                nc = n - 1
            canvas[nr, nc, 0] = targets[k, nr, nc, 0]
            canvas[nr, nc, 1] = targets[k, nr, nc, 1]
            canvas[nr, nc, 2] = targets[k, nr, nc, 2]
            painted[nr, nc] = True
            idx += 1
            if idx == seq_lens[k]:
                idx = 0
            counters[k, r, c] = idx
            pos[k, 0] = nr
            pos[k, 1] = nc
            census[k, d] += 1


@numba.njit(cache=True, nogil=True)
def forced_steps(directions, canvas, painted, targets, pos, census):
    """Move agents along pre-drawn ``directions[step, agent]`` (random baseline)."""
    m = canvas.shape[0]
    n = canvas.shape[1]
    k_agents = pos.shape[0]
    for s in range(directions.shape[0]):
        for k in range(k_agents):
            d = directions[s, k]
            nr = (pos[k, 0] + _DR[d]) % m
            nc = (pos[k, 1] + _DC[d]) % n
            canvas[nr, nc, 0] = targets[k, nr, nc, 0]
            canvas[nr, nc, 1] = targets[k, nr, nc, 1]
            canvas[nr, nc, 2] = targets[k, nr, nc, 2]
            painted[nr, nc] = True
            pos[k, 0] = nr
            pos[k, 1] = nc
            census[k, d] += 1

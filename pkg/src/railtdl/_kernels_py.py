"""Pure-NumPy implementations of the hot kernels.

This module mirrors :mod:`railtdl._ext` (the Cython extension) exactly: both
backends consume the same pre-drawn random numbers and perform the same IEEE
float operations in the same order, so their outputs are bit-identical.
``railtdl.kernels`` picks whichever backend is importable.

The two-state scan avoids a per-step Python loop with a renewal trick: given
the per-step uniforms ``u``, the next state is ``u < p01`` when dead and
``u < p11`` when alive.  Steps where both comparisons agree force the next
state regardless of history ("set"); of the remaining steps, those with
``u < p01`` but not ``u < p11`` (or vice versa) either flip or hold the
state.  The state at any step is then the most recent forced value XOR the
parity of flips since, which is computed with cumulative ops only.
"""

import numpy as np

__all__ = ["markov_scan", "phase_fill"]


def markov_scan(u, p01, p11, s0):
    """Evolve L independent two-state chains from pre-drawn uniforms.

    Parameters
    ----------
    u : (n-1, L) float64
        Transition uniforms in [0, 1); row t drives the step to snapshot t+1.
    p01, p11 : (L,) float64
        Per-chain birth (0->1) and survival (1->1) probabilities.
    s0 : (L,) uint8
        Initial states.

    Returns
    -------
    (n, L) uint8 state matrix, row 0 equal to ``s0``.
    """
    m, L = u.shape
    states = np.empty((m + 1, L), dtype=np.uint8)
    states[0] = s0
    if m == 0:
        return states
    idx = np.arange(m)
    for l in range(L):
        x = u[:, l] < p01[l]  # next state if currently dead
        y = u[:, l] < p11[l]  # next state if currently alive
        forced = x == y
        flips = x & ~y  # next = 1 - current
        last_set = np.maximum.accumulate(np.where(forced, idx, -1))
        cumflips = np.cumsum(flips)
        has_set = last_set >= 0
        anchor = np.where(has_set, x[np.maximum(last_set, 0)], bool(s0[l]))
        flips_at_set = np.where(has_set, cumflips[np.maximum(last_set, 0)], 0)
        parity = (cumflips - flips_at_set) & 1
        states[1:, l] = anchor ^ parity.astype(bool)
    return states


def phase_fill(states, phase0, incr, offsets):
    """Accumulate per-tap phase over alive segments.

    A tap's phase is ``phase0[k]`` at its k-th birth snapshot and advances by
    ``incr[k]`` on every following snapshot it stays alive.  Dead cells stay
    0.  ``phase0``/``incr`` are flat tap-major arrays; ``offsets[l]`` indexes
    the first birth of tap l.

    The accumulation is a strict left fold (same rounding as the compiled
    loop): ``cumsum([phase0, incr, incr, ...])``.

    Returns
    -------
    (n, L) float64 phase matrix.
    """
    n, L = states.shape
    phases = np.zeros((n, L), dtype=np.float64)
    for l in range(L):
        col = states[:, l] != 0
        if not col.any():
            continue
        # segment starts: alive with dead (or no) predecessor; ends exclusive
        edges = np.diff(col.astype(np.int8))
        starts = np.flatnonzero(edges == 1) + 1
        stops = np.flatnonzero(edges == -1) + 1
        if col[0]:
            starts = np.concatenate(([0], starts))
        if col[-1]:
            stops = np.concatenate((stops, [n]))
        b = offsets[l]
        for start, stop in zip(starts, stops):
            seg = np.empty(stop - start, dtype=np.float64)
            seg[0] = phase0[b]
            seg[1:] = incr[b]
            np.cumsum(seg, out=seg)
            phases[start:stop, l] = seg
            b += 1
    return phases

"""First-order two-state Markov chains for multipath birth-death gating.

State 1 means the tap is alive ("birth"), state 0 that it is dead.  A chain
is described by the self-transition probabilities ``p00`` and ``p11`` plus
the probability ``p1_init`` that the tap starts alive: the published
steady-state column is deliberately kept as the t=0 occupancy only, while
temporal evolution uses the transition matrix alone.

All randomness comes from ``numpy.random.Generator`` seeded with PCG64; the
generator identity is part of the reproducibility contract of the trace
format.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels

__all__ = [
    "MarkovChain2",
    "StatePath",
    "ChainEstimate",
    "stationary",
    "sample_path",
    "estimate_chain",
]


@dataclass(frozen=True)
class MarkovChain2:
    """Two-state chain: ``p00``/``p11`` self-transition probs, ``p1_init``
    the probability of starting in state 1."""

    p00: float
    p11: float
    p1_init: float

    @property
    def p01(self) -> float:
        return 1.0 - self.p00

    @property
    def p10(self) -> float:
        return 1.0 - self.p11

    def check(self) -> list[str]:
        out = []
        for name in ("p00", "p11", "p1_init"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                out.append(f"{name}={v} outside [0, 1]")
        return out


@dataclass(frozen=True)
class StatePath:
    """A sampled 0/1 state sequence with its step interval."""

    states: np.ndarray
    step_interval_s: float = 1.0

    def __post_init__(self):
        s = np.asarray(self.states, dtype=np.uint8)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("state path must be a nonempty 1-d sequence")
        if not np.all((s == 0) | (s == 1)):
            raise ValueError("state path entries must be 0 or 1")
        object.__setattr__(self, "states", s)

    def __len__(self) -> int:
        return self.states.size

    def occupancy(self) -> float:
        """Fraction of steps spent alive."""
        return float(np.mean(self.states))


@dataclass(frozen=True)
class ChainEstimate:
    """Maximum-likelihood chain estimate with its transition counts.

    ``undefined_rows`` lists source states that never occur; their row gets
    the 1.0 self-loop convention instead of aborting the pipeline.
    """

    chain: MarkovChain2
    n00: int
    n01: int
    n10: int
    n11: int
    undefined_rows: tuple[int, ...] = field(default=())

    @property
    def n_transitions(self) -> int:
        return self.n00 + self.n01 + self.n10 + self.n11


def stationary(chain: MarkovChain2) -> float:
    """Long-run probability of state 1, ``p01 / (p01 + p10)``.

    When both states are absorbing the path never leaves its start state, so
    the long-run occupancy is the start probability ``p1_init``.
    """
    denom = chain.p01 + chain.p10
    if denom == 0.0:
        return chain.p1_init
    return chain.p01 / denom


def sample_path(chain: MarkovChain2, n_steps: int, rng_seed: int,
                step_interval_s: float = 1.0) -> StatePath:
    """Sample a state path of ``n_steps`` snapshots, deterministic per seed.

    The first state is Bernoulli(``p1_init``); each following state is drawn
    from the transition row of its predecessor.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    rng = np.random.default_rng(rng_seed)
    s0 = (rng.random(1) < chain.p1_init).astype(np.uint8)
    u = rng.random((n_steps - 1, 1))
    states = kernels.markov_scan(u, np.array([chain.p01]), np.array([chain.p11]), s0)
    return StatePath(states[:, 0], step_interval_s)


def estimate_chain(path: StatePath) -> ChainEstimate:
    """Estimate (p00, p11) by transition counting and p1 by occupancy.

    ``p00 = n00/(n00+n01)`` and ``p11 = n11/(n11+n10)``; a source state with
    no observed transitions yields a flagged 1.0 self-loop.
    """
    s = path.states
    if s.size < 2:
        raise ValueError("need at least 2 states to count transitions")
    prev, nxt = s[:-1], s[1:]
    n00 = int(np.sum((prev == 0) & (nxt == 0)))
    n01 = int(np.sum((prev == 0) & (nxt == 1)))
    n10 = int(np.sum((prev == 1) & (nxt == 0)))
    n11 = int(np.sum((prev == 1) & (nxt == 1)))
    undefined = []
    if n00 + n01 > 0:
        p00 = n00 / (n00 + n01)
    else:
        p00 = 1.0
        undefined.append(0)
    if n11 + n10 > 0:
        p11 = n11 / (n11 + n10)
    else:
        p11 = 1.0
        undefined.append(1)
    chain = MarkovChain2(p00=p00, p11=p11, p1_init=float(np.mean(s)))
    return ChainEstimate(chain, n00, n01, n10, n11, tuple(undefined))

"""Non-stationary TDL channel synthesis.

Per snapshot t and tap l the complex gain is

    g[t, l] = z[t, l] * a[t, l] * exp(j * phi[t, l])

where z is the tap's birth-death state, a its amplitude (correlated
lognormal across taps, redrawn each snapshot) and phi a phase drawn
uniformly at each birth and advanced by 2*pi*f_D*dt on every snapshot the
tap stays alive, with a Doppler shift f_D drawn uniformly in
[-f_max, +f_max].  Dead cells are exact complex zeros.

Determinism: all draws come from one PCG64 generator seeded by the config.
The draw order is fixed: (1) L initial-state uniforms, (2) (n-1) x L
transition uniforms, (3) n x L amplitude normals, then (4) per tap in delay
order the birth phases followed by the Doppler shifts.  The hot scans run on
whichever kernel backend is loaded; both backends are bit-identical.
"""

import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .params import LognormalParams, ParamValidationError, TapParameterSet, validate
from .version import GENERATOR_TAG

__all__ = [
    "TraceMeta",
    "CirTrace",
    "GenConfig",
    "DOPPLER_MODES",
    "AMPLITUDE_MODES",
    "nearest_psd_correlation",
    "correlated_lognormal_draw",
    "draw_doppler_shifts",
    "generate",
    "apply_to_signal",
]

logger = logging.getLogger(__name__)

DOPPLER_MODES = ("redrawn-per-birth", "per-tap-constant")
AMPLITUDE_MODES = ("power-scaled-lognormal", "common-lognormal")

DEFAULT_CARRIER_HZ = 2.16e9


@dataclass(frozen=True)
class TraceMeta:
    carrier_hz: float
    delay_resolution_s: float
    rng_seed: int
    generator_tag: str = GENERATOR_TAG


@dataclass(frozen=True)
class CirTrace:
    """Tap gains per snapshot: complex (n_snapshots, L) matrix plus timing."""

    gains: np.ndarray
    delays_s: np.ndarray
    snapshot_interval_s: float
    meta: TraceMeta

    def __post_init__(self):
        g = np.ascontiguousarray(self.gains, dtype=np.complex128)
        d = np.asarray(self.delays_s, dtype=np.float64)
        if g.ndim != 2 or g.shape[0] < 1:
            raise ValueError("gains must be a 2-d matrix with at least one row")
        if d.shape != (g.shape[1],):
            raise ValueError("delays_s length must match gains columns")
        if d.size > 1 and np.any(np.diff(d) <= 0):
            raise ValueError("delays_s must be strictly increasing")
        object.__setattr__(self, "gains", g)
        object.__setattr__(self, "delays_s", d)

    @property
    def n_snapshots(self) -> int:
        return self.gains.shape[0]

    @property
    def n_taps(self) -> int:
        return self.gains.shape[1]

    def alive(self) -> np.ndarray:
        """Boolean alive mask; dead taps are stored as exact zeros."""
        return self.gains != 0


@dataclass(frozen=True)
class GenConfig:
    n_snapshots: int
    rng_seed: int
    doppler_mode: str = "redrawn-per-birth"
    amplitude_mode: str = "power-scaled-lognormal"
    carrier_hz: float = DEFAULT_CARRIER_HZ

    def __post_init__(self):
        if self.n_snapshots < 1:
            raise ValueError("n_snapshots must be >= 1")
        if self.doppler_mode not in DOPPLER_MODES:
            raise ValueError(f"doppler_mode must be one of {DOPPLER_MODES}")
        if self.amplitude_mode not in AMPLITUDE_MODES:
            raise ValueError(f"amplitude_mode must be one of {AMPLITUDE_MODES}")


def nearest_psd_correlation(corr: np.ndarray) -> tuple[np.ndarray, bool]:
    """Clip negative eigenvalues to 0 and rescale to unit diagonal.

    Returns the (possibly unchanged) matrix and whether a repair happened.
    """
    w, v = np.linalg.eigh(corr)
    if w[0] >= -1e-12:
        return corr, False
    fixed = (v * np.clip(w, 0.0, None)) @ v.T
    d = np.sqrt(np.diag(fixed))
    fixed = fixed / np.outer(d, d)
    fixed = (fixed + fixed.T) / 2.0
    np.fill_diagonal(fixed, 1.0)
    return fixed, True


def _corr_factor(corr: np.ndarray) -> np.ndarray:
    """Factor A with A @ A.T equal to the PSD-repaired matrix."""
    repaired, changed = nearest_psd_correlation(corr)
    if changed:
        logger.warning(
            "correlation matrix was not PSD; repaired to\n%r", repaired
        )
    w, v = np.linalg.eigh(repaired)
    return v * np.sqrt(np.clip(w, 0.0, None))


def _check_correlation(corr: np.ndarray) -> np.ndarray:
    corr = np.asarray(corr, dtype=np.float64)
    if corr.ndim != 2 or corr.shape[0] != corr.shape[1]:
        raise ValueError(f"correlation matrix must be square, got {corr.shape}")
    if np.any(np.abs(np.diag(corr) - 1.0) > 1e-12):
        raise ValueError("correlation matrix diagonal must equal 1")
    if not np.allclose(corr, corr.T, rtol=0, atol=1e-12):
        raise ValueError("correlation matrix must be symmetric")
    return corr


def correlated_lognormal_draw(corr: np.ndarray, ln_params: LognormalParams,
                              n: int, seed: int) -> np.ndarray:
    """Draw an (n, L) matrix of jointly lognormal amplitudes.

    Gaussian copula: standard normals are correlated with ``corr`` (read in
    the log domain), scaled to (mu, sigma) and exponentiated, so each column
    is marginally LN(mu, sigma) and the log-domain correlation matches the
    target after PSD repair.
    """
    corr = _check_correlation(corr)
    if n < 1:
        raise ValueError("n must be >= 1")
    factor = _corr_factor(corr)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, corr.shape[0]))
    return np.exp(ln_params.mu + ln_params.sigma * (z @ factor.T))


def draw_doppler_shifts(rng: np.random.Generator, f_max_hz: float,
                        size: int) -> np.ndarray:
    """Doppler shifts uniform on [-f_max, +f_max]; the generator's draw."""
    return rng.uniform(-f_max_hz, f_max_hz, size)


def _birth_counts(states: np.ndarray) -> np.ndarray:
    """Births per tap: alive cells whose predecessor is dead (or row 0)."""
    starts = states.astype(bool).copy()
    starts[1:] &= states[:-1] == 0
    return starts.sum(axis=0)


def generate(params: TapParameterSet, cfg: GenConfig) -> CirTrace:
    """Synthesize a non-stationary TDL trace from a validated parameter set.

    Raises :class:`ParamValidationError` when the parameter set fails
    :func:`railtdl.params.validate`.
    """
    violations = validate(params)
    if violations:
        raise ParamValidationError(violations)

    n, L = cfg.n_snapshots, params.n_taps
    dt = params.snapshot_interval_s
    rng = np.random.default_rng(cfg.rng_seed)

    p01 = np.array([t.chain.p01 for t in params.taps])
    p11 = np.array([t.chain.p11 for t in params.taps])
    p1_init = np.array([t.chain.p1_init for t in params.taps])

    s0 = (rng.random(L) < p1_init).astype(np.uint8)
    u = rng.random((n - 1, L))
    states = kernels.markov_scan(u, p01, p11, s0)

    z = rng.standard_normal((n, L))
    ln = params.amplitude_dist
    amps = np.exp(ln.mu + ln.sigma * (z @ _corr_factor(params.correlation).T))
    if cfg.amplitude_mode == "power-scaled-lognormal":
        # keep the lognormal shape but pin each tap's conditional mean square
        # power to its published relative power
        powers_lin = np.array([t.mean_power_linear for t in params.taps])
        amps = amps * np.sqrt(powers_lin / ln.mean_square())

    lo, hi = params.phase_range
    births = _birth_counts(states)
    offsets = np.concatenate(([0], np.cumsum(births))).astype(np.int64)
    phase0 = np.empty(offsets[-1], dtype=np.float64)
    incr = np.empty(offsets[-1], dtype=np.float64)
    for l in range(L):
        b = births[l]
        phase0[offsets[l]:offsets[l + 1]] = rng.uniform(lo, hi, b)
        if cfg.doppler_mode == "per-tap-constant":
            dopplers = np.full(b, draw_doppler_shifts(rng, params.max_doppler_hz, 1)[0])
        else:
            dopplers = draw_doppler_shifts(rng, params.max_doppler_hz, b)
        incr[offsets[l]:offsets[l + 1]] = 2.0 * np.pi * dopplers * dt

    phases = kernels.phase_fill(states, phase0, incr, offsets[:-1])

    alive = states != 0
    gains = np.zeros((n, L), dtype=np.complex128)
    gains[alive] = amps[alive] * np.exp(1j * phases[alive])

    meta = TraceMeta(
        carrier_hz=cfg.carrier_hz,
        delay_resolution_s=params.delay_resolution_s,
        rng_seed=cfg.rng_seed,
    )
    return CirTrace(gains, params.delays_s, dt, meta)


def apply_to_signal(trace: CirTrace, x, sample_rate_hz: float) -> np.ndarray:
    """Run a sampled signal through the time-varying channel.

    ``y[k] = sum_l gains[snap(k), l] * x[k - bins(l)]`` where snap(k) maps
    the sample index onto trace snapshots (clamped at the end) and bins(l) is
    the tap delay in samples.  Every tap delay must land on a sample bin.
    """
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("input signal must be a nonempty 1-d sequence")
    if sample_rate_hz <= 0:
        raise ValueError("sample_rate_hz must be > 0")

    bins = np.empty(trace.n_taps, dtype=np.int64)
    for l, d in enumerate(trace.delays_s):
        q = d * sample_rate_hz
        if abs(q - round(q)) > 1e-6 * max(1.0, abs(q)):
            raise ValueError(
                f"tap {l}: delay {d} s is not an integer number of samples "
                f"at {sample_rate_hz} Hz"
            )
        bins[l] = round(q)

    n_samp = x.size
    samples_per_snap = sample_rate_hz * trace.snapshot_interval_s
    snap = np.minimum(
        (np.arange(n_samp) / samples_per_snap).astype(np.int64),
        trace.n_snapshots - 1,
    )
    y = np.zeros(n_samp, dtype=np.complex128)
    for l in range(trace.n_taps):
        b = bins[l]
        if b >= n_samp:
            continue
        shifted = np.zeros(n_samp, dtype=np.complex128)
        shifted[b:] = x[: n_samp - b]
        y += trace.gains[snap, l] * shifted
    return y

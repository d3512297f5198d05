"""Stationary WSSUS TDL baseline.

Every tap is alive in every snapshot; fading is complex Gaussian per tap
(sum of sinusoids), uncorrelated across taps, with temporal correlation set
by the Doppler model: ``uniform`` draws each sinusoid frequency uniformly in
[-f_max, +f_max] (mirroring the Markov model's Doppler), ``classic`` draws
f_max*cos(angle) for the Jakes spectrum.  Against the Markov model with the
same delays and powers, the only difference is the missing birth-death
process.
"""

from dataclasses import dataclass

import numpy as np

from .generator import DEFAULT_CARRIER_HZ, CirTrace, TraceMeta
from .params import TapParameterSet

__all__ = ["StationaryTdlProfile", "generate_stationary", "profile_from_params"]

DOPPLER_MODELS = ("uniform", "classic")

# Sinusoids per tap; enough for near-Gaussian (Rayleigh envelope) fading.
N_SINUSOIDS = 64


@dataclass(frozen=True)
class StationaryTdlProfile:
    delays_s: np.ndarray
    powers_db: np.ndarray
    doppler_model: str = "uniform"
    fading: str = "rayleigh-per-tap"

    def __post_init__(self):
        d = np.asarray(self.delays_s, dtype=np.float64)
        p = np.asarray(self.powers_db, dtype=np.float64)
        if d.size == 0 or d.shape != p.shape:
            raise ValueError("delays_s and powers_db must be nonempty, equal length")
        if np.any(d < 0) or (d.size > 1 and np.any(np.diff(d) <= 0)):
            raise ValueError("delays_s must be nonnegative and strictly increasing")
        if self.doppler_model not in DOPPLER_MODELS:
            raise ValueError(f"doppler_model must be one of {DOPPLER_MODELS}")
        if self.fading != "rayleigh-per-tap":
            raise ValueError("only rayleigh-per-tap fading is supported")
        object.__setattr__(self, "delays_s", d)
        object.__setattr__(self, "powers_db", p)

    @property
    def n_taps(self) -> int:
        return self.delays_s.size


def profile_from_params(params: TapParameterSet,
                        doppler_model: str = "uniform") -> StationaryTdlProfile:
    """Baseline profile with the Markov model's delays and powers, so a
    comparison isolates the effect of non-stationarity."""
    return StationaryTdlProfile(params.delays_s, params.powers_db, doppler_model)


def generate_stationary(profile: StationaryTdlProfile, f_max_hz: float, n: int,
                        seed: int, snapshot_interval_s: float = 1e-3,
                        carrier_hz: float = DEFAULT_CARRIER_HZ,
                        delay_resolution_s: float = 100e-9) -> CirTrace:
    """Generate a stationary trace: occupancy is exactly 1 for every tap.

    Per tap: g[t] = sqrt(P/N) * sum_k exp(j*(theta_k + 2*pi*f_k*dt*t)) with
    theta_k uniform on [0, 2*pi) and f_k per the profile's Doppler model.
    Draw order per tap: N phases then N frequencies.  Deterministic per seed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if profile.n_taps == 0:
        raise ValueError("profile has no taps")
    rng = np.random.default_rng(seed)
    L = profile.n_taps
    powers_lin = 10.0 ** (profile.powers_db / 10.0)
    t = np.arange(n, dtype=np.float64)
    gains = np.empty((n, L), dtype=np.complex128)
    for l in range(L):
        theta = rng.uniform(0.0, 2.0 * np.pi, N_SINUSOIDS)
        if profile.doppler_model == "uniform":
            f = rng.uniform(-f_max_hz, f_max_hz, N_SINUSOIDS)
        else:
            f = f_max_hz * np.cos(rng.uniform(0.0, 2.0 * np.pi, N_SINUSOIDS))
        w = 2.0 * np.pi * f * snapshot_interval_s
        acc = np.zeros(n, dtype=np.complex128)
        for k in range(N_SINUSOIDS):  # keeps memory O(n), order fixed
            acc += np.exp(1j * (theta[k] + w[k] * t))
        gains[:, l] = np.sqrt(powers_lin[l] / N_SINUSOIDS) * acc
    meta = TraceMeta(carrier_hz=carrier_hz, delay_resolution_s=delay_resolution_s,
                     rng_seed=seed)
    return CirTrace(gains, profile.delays_s, snapshot_interval_s, meta)

"""Model parameter types, the published 5G-R preset, and sizing formulas.

A :class:`TapParameterSet` is the complete channel description: per-tap
delay/power/birth-death chain, one global lognormal amplitude law, a uniform
phase interval, a maximum Doppler shift, and the tap amplitude correlation
matrix.  Parameter sets are immutable and serialize to a versioned JSON
schema (round-trips are value-identical).
"""

import json
import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .markov import MarkovChain2

__all__ = [
    "SPEED_OF_LIGHT",
    "LognormalParams",
    "TapEntry",
    "TapParameterSet",
    "preset_5gr",
    "validate",
    "tap_count",
    "max_doppler",
    "save_params",
    "load_params",
    "ParamValidationError",
]

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact

PARAMS_SCHEMA_VERSION = 1

# Relative slack when checking that a delay is an integer number of bins.
_BIN_ALIGN_RTOL = 1e-6


class ParamValidationError(ValueError):
    """Raised when an operation is handed a parameter set that fails
    :func:`validate`; carries the violation list."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class LognormalParams:
    """Location/scale of the natural log of a lognormal amplitude."""

    mu: float
    sigma: float

    def mean_square(self) -> float:
        """E[X^2] = exp(2*mu + 2*sigma^2) for X ~ LN(mu, sigma)."""
        return math.exp(2.0 * self.mu + 2.0 * self.sigma ** 2)


@dataclass(frozen=True)
class TapEntry:
    """One tap: absolute delay, mean power relative to tap 1, and its
    birth-death chain."""

    delay_s: float
    mean_power_db: float
    chain: MarkovChain2

    @property
    def mean_power_linear(self) -> float:
        return 10.0 ** (self.mean_power_db / 10.0)


@dataclass(frozen=True)
class TapParameterSet:
    taps: tuple[TapEntry, ...]
    amplitude_dist: LognormalParams
    phase_range: tuple[float, float]  # radians, [lo, hi]
    max_doppler_hz: float
    correlation: np.ndarray  # L x L, read-only
    snapshot_interval_s: float
    delay_resolution_s: float

    def __post_init__(self):
        taps = tuple(self.taps)
        corr = np.array(self.correlation, dtype=np.float64)
        corr.flags.writeable = False
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "correlation", corr)
        object.__setattr__(self, "phase_range", tuple(self.phase_range))

    @property
    def n_taps(self) -> int:
        return len(self.taps)

    @property
    def delays_s(self) -> np.ndarray:
        return np.array([t.delay_s for t in self.taps])

    @property
    def powers_db(self) -> np.ndarray:
        return np.array([t.mean_power_db for t in self.taps])


def preset_5gr() -> TapParameterSet:
    """The measured 5-tap 5G-R parameter set (2.16 GHz, 10 MHz, 80 km/h).

    Delays are exact multiples of the 100 ns delay resolution; tap 1 is the
    0 dB anchor and is always alive (its chain is the absorbing (0, 1, 1)).
    The snapshot interval defaults to 1 ms, on the order of the channel
    coherence time at 160 Hz maximum Doppler.
    """
    rows = [
        # delay_s, power_db, p00, p11, p1
        (0 * 100e-9, 0.00, 0.0000, 1.0000, 1.0000),
        (1 * 100e-9, -3.14, 0.9227, 0.9485, 0.9209),
        (2 * 100e-9, -17.02, 0.8403, 0.8571, 0.7670),
        (3 * 100e-9, -26.31, 0.7668, 0.6975, 0.5676),
        (4 * 100e-9, -39.35, 0.7978, 0.8875, 0.4647),
    ]
    taps = tuple(
        TapEntry(d, p, MarkovChain2(p00, p11, p1)) for d, p, p00, p11, p1 in rows
    )
    correlation = np.array([
        [1.0000, 0.5009, 0.7733, 0.2320, 0.0525],
        [0.5009, 1.0000, 0.6170, 0.5997, 0.1714],
        [0.7733, 0.6170, 1.0000, 0.4369, 0.0513],
        [0.2320, 0.5997, 0.4369, 1.0000, 0.6132],
        [0.0525, 0.1714, 0.0513, 0.6132, 1.0000],
    ])
    return TapParameterSet(
        taps=taps,
        amplitude_dist=LognormalParams(mu=-3.66, sigma=1.08),
        phase_range=(0.0, math.pi),
        max_doppler_hz=160.0,
        correlation=correlation,
        snapshot_interval_s=1e-3,
        delay_resolution_s=100e-9,
    )


def validate(params: TapParameterSet) -> list[str]:
    """Check every structural invariant; returns [] when the set is valid.

    Violations are data, not exceptions: each entry names the offending
    field.  Note the published steady-state column is NOT required to match
    the stationary distribution of the printed transition matrix -- the two
    disagree in the measured preset and both are stored verbatim.
    """
    v: list[str] = []
    L = params.n_taps
    if L < 1:
        v.append("taps: need at least one tap")
        return v

    res = params.delay_resolution_s
    if res <= 0:
        v.append(f"delay_resolution_s={res}: must be > 0")
    if params.snapshot_interval_s <= 0:
        v.append(f"snapshot_interval_s={params.snapshot_interval_s}: must be > 0")
    if params.max_doppler_hz < 0:
        v.append(f"max_doppler_hz={params.max_doppler_hz}: must be >= 0")

    for i, tap in enumerate(params.taps):
        if tap.delay_s < 0:
            v.append(f"taps[{i}].delay_s={tap.delay_s}: negative")
        elif res > 0:
            q = tap.delay_s / res
            if abs(q - round(q)) > _BIN_ALIGN_RTOL * max(1.0, abs(q)):
                v.append(
                    f"taps[{i}].delay_s={tap.delay_s}: not a multiple of "
                    f"delay_resolution_s={res}"
                )
        if tap.mean_power_db > 0:
            v.append(f"taps[{i}].mean_power_db={tap.mean_power_db}: must be <= 0")
        for issue in tap.chain.check():
            v.append(f"taps[{i}].chain.{issue}")
    delays = params.delays_s
    if np.any(np.diff(delays) <= 0):
        v.append("taps: delays not strictly increasing")
    if params.taps[0].mean_power_db != 0.0:
        v.append(
            f"taps[0].mean_power_db={params.taps[0].mean_power_db}: "
            "tap 1 anchors the relative scale at 0 dB"
        )

    if params.amplitude_dist.sigma <= 0:
        v.append(f"amplitude_dist.sigma={params.amplitude_dist.sigma}: must be > 0")
    lo, hi = params.phase_range
    if not lo <= hi:
        v.append(f"phase_range=({lo}, {hi}): lower bound exceeds upper")

    corr = params.correlation
    if corr.shape != (L, L):
        v.append(f"correlation: shape {corr.shape} != ({L}, {L})")
    else:
        if not np.array_equal(corr, corr.T):
            v.append("correlation: not symmetric")
        if np.any(np.diag(corr) != 1.0):
            v.append("correlation: diagonal entries must equal 1")
        if np.any(np.abs(corr) > 1.0):
            v.append("correlation: entries outside [-1, 1]")
    return v


def tap_count(max_rms_ds_s: float, resolution_s: float) -> int:
    """Number of taps: ceil(max RMS delay spread / delay resolution) + 1.

    Exact multiples are snapped before the ceiling so that float noise in
    e.g. 300e-9/100e-9 cannot add a spurious tap.
    """
    if max_rms_ds_s <= 0 or resolution_s <= 0:
        raise ValueError("max_rms_ds_s and resolution_s must be > 0")
    q = max_rms_ds_s / resolution_s
    nearest = round(q)
    if nearest >= 1 and abs(q - nearest) <= 1e-9 * max(1.0, abs(q)):
        return int(nearest) + 1
    return math.ceil(q) + 1


def max_doppler(speed_mps: float, carrier_hz: float) -> float:
    """Maximum Doppler shift v * f / c in Hz (incidence angle zero)."""
    if speed_mps < 0:
        raise ValueError("speed_mps must be >= 0")
    if carrier_hz <= 0:
        raise ValueError("carrier_hz must be > 0")
    return speed_mps * carrier_hz / SPEED_OF_LIGHT


# --- serialization ----------------------------------------------------------

_TOP_KEYS = {
    "schema_version",
    "taps",
    "amplitude_dist",
    "phase_dist",
    "max_doppler_hz",
    "correlation",
    "snapshot_interval_s",
    "delay_resolution_s",
}


def params_to_dict(params: TapParameterSet) -> dict:
    return {
        "schema_version": PARAMS_SCHEMA_VERSION,
        "taps": [
            {
                "delay_s": t.delay_s,
                "mean_power_db": t.mean_power_db,
                "chain": {
                    "p00": t.chain.p00,
                    "p11": t.chain.p11,
                    "p1_init": t.chain.p1_init,
                },
            }
            for t in params.taps
        ],
        "amplitude_dist": {
            "mu": params.amplitude_dist.mu,
            "sigma": params.amplitude_dist.sigma,
        },
        "phase_dist": list(params.phase_range),
        "max_doppler_hz": params.max_doppler_hz,
        "correlation": params.correlation.tolist(),
        "snapshot_interval_s": params.snapshot_interval_s,
        "delay_resolution_s": params.delay_resolution_s,
    }


def params_from_dict(d: dict) -> TapParameterSet:
    unknown = set(d) - _TOP_KEYS
    if unknown:
        raise ValueError(f"unknown parameter keys: {sorted(unknown)}")
    version = d.get("schema_version")
    if version != PARAMS_SCHEMA_VERSION:
        raise ValueError(f"unsupported params schema_version: {version!r}")
    taps = tuple(
        TapEntry(
            delay_s=t["delay_s"],
            mean_power_db=t["mean_power_db"],
            chain=MarkovChain2(
                p00=t["chain"]["p00"],
                p11=t["chain"]["p11"],
                p1_init=t["chain"]["p1_init"],
            ),
        )
        for t in d["taps"]
    )
    return TapParameterSet(
        taps=taps,
        amplitude_dist=LognormalParams(**d["amplitude_dist"]),
        phase_range=tuple(d["phase_dist"]),
        max_doppler_hz=d["max_doppler_hz"],
        correlation=np.array(d["correlation"]),
        snapshot_interval_s=d["snapshot_interval_s"],
        delay_resolution_s=d["delay_resolution_s"],
    )


def save_params(params: TapParameterSet, path: str) -> None:
    """Write the JSON form atomically (temp file + rename)."""
    payload = json.dumps(params_to_dict(params), indent=2) + "\n"
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_params(path: str) -> TapParameterSet:
    with open(path) as fh:
        return params_from_dict(json.load(fh))

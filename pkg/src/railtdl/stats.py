"""Channel statistics: power delay profiles, RMS delay spread, fits,
inter-tap correlation and distribution comparison.

Conventions: powers are linear |gain|^2 unless a name says dB; delay-spread
censoring keeps bins strictly more than ``threshold_db`` above the noise
floor.  A noiseless synthetic trace (one containing exact-zero cells) has a
floor of -inf, so nothing is censored; for ingested noisy traces the floor
is the median power of the last delay bin.
"""

import math
from dataclasses import dataclass

import numpy as np

from .generator import CirTrace

__all__ = [
    "Apdp",
    "EmpiricalPdf",
    "LognormalFit",
    "DistanceReport",
    "estimate_noise_floor_db",
    "apdp",
    "window_pdp_linear",
    "rms_delay_spread",
    "rms_ds_series",
    "fit_lognormal",
    "correlation_matrix",
    "empirical_pdf",
    "distribution_distance",
    "ks_two_sample",
    "ks_lognormal",
]

DEFAULT_THRESHOLD_DB = 6.0

_erf = np.vectorize(math.erf, otypes=[np.float64])


@dataclass(frozen=True)
class Apdp:
    """Average power delay profile over one window, strongest tap at 0 dB.

    Censored taps (never alive in the window, or below the censoring
    threshold) are NaN, not numbers.
    """

    powers_db: np.ndarray
    window: tuple[int, int]  # (start snapshot, length)
    noise_floor_db: float


@dataclass(frozen=True)
class EmpiricalPdf:
    bin_edges: np.ndarray
    densities: np.ndarray
    n_samples: int

    def integral(self) -> float:
        return float(np.sum(self.densities * np.diff(self.bin_edges)))


@dataclass(frozen=True)
class LognormalFit:
    """MLE fit of ln-samples: sample mean and population std.

    ``degenerate`` marks a zero-variance sample (sigma = 0), which is a
    legal fit result but not a usable distribution parameter.
    """

    mu: float
    sigma: float
    n_samples: int

    @property
    def degenerate(self) -> bool:
        return self.sigma == 0.0


@dataclass(frozen=True)
class DistanceReport:
    ks_stat: float
    mean_diff: float
    std_diff: float


# mean/median of exponentially distributed power is 1/ln 2 ~ 1.44; a last
# bin far outside this band is signal (constant: 1, lognormal: ~10), not noise
_NOISE_RATIO_BAND = (1.1, 2.0)


def _window_noise_floors_db(g3: np.ndarray) -> np.ndarray:
    """Per-window noise floors for a (n_windows, window_len, L) gain stack.

    Exact zeros mark noiseless synthetic data (floor -inf).  Otherwise the
    floor is the median power of the last delay bin, accepted only when that
    bin is weaker than the strongest bin and its power fluctuates like
    complex-Gaussian noise; a window without a believable floor gets -inf
    (nothing is censored).
    """
    p = np.abs(g3) ** 2
    has_zero = (g3 == 0).any(axis=(1, 2))
    med = np.median(p, axis=1)  # (n_windows, L)
    mean_last = p[:, :, -1].mean(axis=1)
    med_last = med[:, -1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = mean_last / med_last
        noise_like = ((med_last < med.max(axis=1))
                      & (ratio >= _NOISE_RATIO_BAND[0])
                      & (ratio <= _NOISE_RATIO_BAND[1]))
        floors = np.where(noise_like & ~has_zero,
                          10.0 * np.log10(np.where(med_last > 0, med_last, 1.0)),
                          -np.inf)
    return floors


def estimate_noise_floor_db(gains: np.ndarray) -> float:
    """Noise floor of a trace, -inf when it has none to see."""
    return float(_window_noise_floors_db(gains[None, :, :])[0])


def window_pdp_linear(trace: CirTrace, window_len: int) -> np.ndarray:
    """Plain per-window average of |gain|^2, dead snapshots included.

    This is the physically averaged energy a sounder would see: a tap dead
    through half a window shows half its conditional power.  Returns an
    (n_windows, L) matrix; trailing snapshots that do not fill a window are
    dropped.
    """
    n = trace.n_snapshots
    if not 1 <= window_len <= n:
        raise ValueError(f"window_len must be in [1, {n}]")
    n_win = n // window_len
    p = np.abs(trace.gains[: n_win * window_len]) ** 2
    return p.reshape(n_win, window_len, trace.n_taps).mean(axis=1)


def apdp(trace: CirTrace, window_len: int,
         threshold_db: float = DEFAULT_THRESHOLD_DB) -> list[Apdp]:
    """Alive-conditioned APDPs per non-overlapping window.

    Per window and tap: mean |gain|^2 over the snapshots the tap is alive,
    in dB, normalized so the strongest tap sits at 0 dB.  Taps never alive
    in the window, or below floor + threshold, come out censored (NaN).
    """
    n = trace.n_snapshots
    if not 1 <= window_len <= n:
        raise ValueError(f"window_len must be in [1, {n}]")
    out = []
    for start in range(0, (n // window_len) * window_len, window_len):
        g = trace.gains[start:start + window_len]
        p = np.abs(g) ** 2
        alive = g != 0
        n_alive = alive.sum(axis=0)
        with np.errstate(invalid="ignore"):
            cond = np.where(n_alive > 0, p.sum(axis=0) / np.maximum(n_alive, 1), np.nan)
        floor = estimate_noise_floor_db(g)
        with np.errstate(divide="ignore", invalid="ignore"):
            db = 10.0 * np.log10(cond)
        db[~(db > floor + threshold_db)] = np.nan
        if np.all(np.isnan(db)):
            out.append(Apdp(db, (start, window_len), floor))
            continue
        db = db - np.nanmax(db)
        out.append(Apdp(db, (start, window_len), floor))
    return out


def rms_delay_spread(pdp_linear, delays_s, threshold_db: float = DEFAULT_THRESHOLD_DB,
                     noise_floor_db: float = -np.inf) -> float:
    """Second-central-moment delay spread over bins surviving the threshold.

    sigma_tau = sqrt(sum(p*tau^2)/sum(p) - (sum(p*tau)/sum(p))^2) over bins
    strictly more than ``threshold_db`` above ``noise_floor_db``.  NaN when
    every bin is censored (undefined, distinct from 0).
    """
    p = np.asarray(pdp_linear, dtype=np.float64)
    tau = np.asarray(delays_s, dtype=np.float64)
    if p.shape != tau.shape or p.size < 1:
        raise ValueError("pdp_linear and delays_s must be equal-length, nonempty")
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(np.where(p > 0, p, np.nan))
    keep = db > noise_floor_db + threshold_db
    keep &= ~np.isnan(db)
    if not keep.any():
        return float("nan")
    p, tau = p[keep], tau[keep]
    total = p.sum()
    m1 = (p * tau).sum() / total
    m2 = (p * tau * tau).sum() / total
    return math.sqrt(max(m2 - m1 * m1, 0.0))


def rms_ds_series(trace: CirTrace, window_len: int = 1,
                  threshold_db: float = DEFAULT_THRESHOLD_DB,
                  noise_floor_db: float | None = None) -> np.ndarray:
    """RMS delay spread per non-overlapping window (NaN for all-censored).

    Windows use the plain (dead-inclusive) PDP, so birth-death directly
    modulates the spread.  ``noise_floor_db=None`` estimates a floor per
    window; pass a float to censor every window against one floor.
    """
    pdps = window_pdp_linear(trace, window_len)
    n_win, L = pdps.shape
    if noise_floor_db is None:
        g = trace.gains[: n_win * window_len].reshape(n_win, window_len, L)
        floors = _window_noise_floors_db(g)
    else:
        floors = np.full(n_win, noise_floor_db)

    tau = trace.delays_s
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(np.where(pdps > 0, pdps, 0))
    p = np.where(db > floors[:, None] + threshold_db, pdps, 0.0)
    tot = p.sum(axis=1)
    ok = tot > 0
    safe = np.where(ok, tot, 1.0)
    m1 = (p @ tau) / safe
    m2 = (p @ (tau * tau)) / safe
    var = np.maximum(m2 - m1 * m1, 0.0)
    return np.where(ok, np.sqrt(var), np.nan)


def fit_lognormal(samples) -> LognormalFit:
    """Maximum-likelihood lognormal fit: mu/sigma of the log samples."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2:
        raise ValueError("need at least 2 samples")
    if np.any(x <= 0):
        raise ValueError("lognormal samples must be positive")
    ln = np.log(x)
    if ln.min() == ln.max():  # exactly constant: report sigma 0, not rounding dust
        return LognormalFit(float(ln[0]), 0.0, x.size)
    return LognormalFit(float(ln.mean()), float(ln.std()), x.size)


def correlation_matrix(amps) -> np.ndarray:
    """Pearson correlation between tap amplitude columns.

    Zero-variance columns are undefined: their whole row/column is NaN.
    """
    a = np.asarray(amps, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 2:
        raise ValueError("need an (n >= 2, L) matrix")
    L = a.shape[1]
    valid = a.std(axis=0) > 0
    out = np.full((L, L), np.nan)
    if valid.any():
        sub = np.corrcoef(a[:, valid], rowvar=False)
        sub = np.atleast_2d(sub)
        sub = np.clip((sub + sub.T) / 2.0, -1.0, 1.0)
        np.fill_diagonal(sub, 1.0)
        out[np.ix_(valid, valid)] = sub
    return out


def empirical_pdf(samples, n_bins: int) -> EmpiricalPdf:
    """Equal-width histogram density over [min, max]; integrates to 1."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 1:
        raise ValueError("need at least 1 sample")
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    densities, edges = np.histogram(x, bins=n_bins, density=True)
    return EmpiricalPdf(edges, densities, x.size)


def ks_two_sample(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic, max |ECDF_a - ECDF_b|."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_lognormal(samples, fit: LognormalFit) -> float:
    """One-sample KS statistic of log-samples against N(mu, sigma)."""
    x = np.sort(np.log(np.asarray(samples, dtype=np.float64)))
    if fit.sigma == 0:
        return float("nan")
    cdf = 0.5 * (1.0 + _erf((x - fit.mu) / (fit.sigma * math.sqrt(2.0))))
    n = x.size
    i = np.arange(1, n + 1)
    return float(np.max(np.maximum(i / n - cdf, cdf - (i - 1) / n)))


def distribution_distance(a, b) -> DistanceReport:
    """KS statistic plus mean/std differences between two sample sets."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    return DistanceReport(
        ks_stat=ks_two_sample(a, b),
        mean_diff=float(a.mean() - b.mean()),
        std_diff=float(a.std() - b.std()),
    )

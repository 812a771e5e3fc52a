"""Estimators and convergence diagnostics for recorded traces."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateTraceError, ParameterError


@dataclass
class Trace:
    """An ordered sequence of recorded scalar samples."""

    values: np.ndarray
    thin: int = 1
    label: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.size < 1:
            raise ParameterError("trace must hold at least one sample")
        if self.thin < 1:
            raise ParameterError(f"thinning interval must be >= 1, got {self.thin}")

    def __len__(self):
        return self.values.size


def thin_trace(trace: Trace, every: int) -> Trace:
    """Keep every ``every``-th sample (the last of each block), in order."""
    if every < 1:
        raise ParameterError(f"thinning interval must be >= 1, got {every}")
    return Trace(trace.values[every - 1 :: every], thin=trace.thin * every, label=trace.label)


def _autocovariances(values: np.ndarray) -> np.ndarray:
    """Biased sample autocovariances at all lags, via FFT."""
    n = values.size
    centered = values - values.mean()
    size = 1 << (2 * n - 1).bit_length()
    spectrum = np.fft.rfft(centered, size)
    acov = np.fft.irfft(spectrum * np.conj(spectrum), size)[:n]
    return acov / n


def effective_sample_size(trace: Trace) -> float:
    """ESS from the initial monotone positive sequence of autocovariance pairs.

    Sums Gamma_m = gamma_{2m} + gamma_{2m+1} while the pairs stay positive,
    forcing monotone non-increase, to estimate the asymptotic variance; the
    ESS is n * gamma_0 over that.  Clamped into [1, n].  For an AR(1) chain
    with coefficient a this converges to n * (1 - a) / (1 + a).
    """
    values = trace.values
    n = values.size
    if n < 10:
        raise ParameterError(f"need at least 10 samples for an ESS estimate, got {n}")
    acov = _autocovariances(values)
    gamma0 = acov[0]
    if not math.isfinite(gamma0) or gamma0 <= 0.0:
        raise DegenerateTraceError("trace has zero variance; ESS is undefined")

    asymptotic_var = -gamma0
    prev_pair = math.inf
    for m in range((n - 1) // 2 + 1):
        hi = 2 * m + 1
        pair = acov[2 * m] + (acov[hi] if hi < n else 0.0)
        if pair <= 0.0:
            break
        pair = min(pair, prev_pair)
        asymptotic_var += 2.0 * pair
        prev_pair = pair
    if asymptotic_var <= 0.0:
        # Strongly antithetic trace: the initial sequence is empty and the
        # estimator degenerates; report the cap.
        return float(n)
    ess = n * gamma0 / asymptotic_var
    return float(min(max(ess, 1.0), n))


@dataclass
class EstimateReport:
    """Point estimate with its autocorrelation-aware standard error."""

    mean: float
    variance: float
    ess: float
    standard_error: float = field(init=False)

    def __post_init__(self):
        self.standard_error = math.sqrt(self.variance / self.ess)


def estimate(trace: Trace) -> EstimateReport:
    """Mean, sample variance, ESS, and SE = sqrt(variance / ESS)."""
    ess = effective_sample_size(trace)
    values = trace.values
    return EstimateReport(
        mean=float(values.mean()),
        variance=float(values.var(ddof=1)),
        ess=ess,
    )

"""Benchmark target distributions for the samplers and experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .augmented import mod_one
from .errors import ParameterError
from .kernels import norm_cdf, norm_ppf

FUNNEL_DIM = 10
FUNNEL_V_SD = 3.0
RING_SIZE = 100

_LOG_2PI = math.log(2.0 * math.pi)
# math.exp overflows (raises) above this; treat exp(-v) as +inf beyond it.
_EXP_OVERFLOW = 709.0

# Small probability vectors reused across the validation suite.
TWO_STATE_SKEWED = np.array([1.0 / 3.0, 2.0 / 3.0])
TWO_STATE_HEAVY = np.array([5.0 / 6.0, 1.0 / 6.0])
THREE_STATE = np.array([0.2, 0.3, 0.5])


@dataclass
class FunnelState:
    """Log-variance coordinate v plus the nine conditionally Gaussian x's."""

    v: float
    x: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if self.x.shape != (FUNNEL_DIM - 1,):
            raise ParameterError(f"funnel state needs 9 x coordinates, got {self.x.shape}")


def _exp_neg(v: float) -> float:
    """exp(-v) without OverflowError; saturates to +inf."""
    if -v > _EXP_OVERFLOW:
        return math.inf
    return math.exp(-v)


def funnel_logpdf(state: FunnelState) -> float:
    """Log density of the funnel: v ~ N(0, 9), x_i | v ~ N(0, e^v)."""
    v = state.v
    inv_var = _exp_neg(v)
    sum_sq = float(np.dot(state.x, state.x))
    if math.isinf(inv_var):
        quad = 0.0 if sum_sq == 0.0 else math.inf
    else:
        quad = sum_sq * inv_var
    return (
        -0.5 * (v * v) / (FUNNEL_V_SD**2)
        - 0.5 * math.log(2.0 * math.pi * FUNNEL_V_SD**2)
        - 4.5 * (_LOG_2PI + v)
        - 0.5 * quad
    )


def funnel_logpdf_grad(state: FunnelState) -> np.ndarray:
    """Gradient of funnel_logpdf, (d/dv, d/dx_1..9).  Test support only."""
    inv_var = _exp_neg(state.v)
    sum_sq = float(np.dot(state.x, state.x))
    dv = -state.v / FUNNEL_V_SD**2 - 4.5 + 0.5 * sum_sq * inv_var
    dx = -state.x * inv_var
    return np.concatenate(([dv], dx))


def funnel_exact_sample(rng) -> FunnelState:
    """Exact draw from the funnel.  Accepts a seed or a numpy Generator."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    v = FUNNEL_V_SD * rng.standard_normal()
    x = math.exp(v / 2.0) * rng.standard_normal(FUNNEL_DIM - 1)
    return FunnelState(v, x)


def funnel_v_conditional(sum_sq_x: float):
    """Unnormalized log density of v given the x's (up to constants in v).

    Collecting the v-dependent terms of the joint gives
    -v^2/18 - 4.5 v - 0.5 * sum(x^2) * exp(-v).
    """

    def log_density(v: float) -> float:
        inv_var = _exp_neg(v)
        if math.isinf(inv_var):
            quad = 0.0 if sum_sq_x == 0.0 else math.inf
        else:
            quad = sum_sq_x * inv_var
        return -v * v / 18.0 - 4.5 * v - 0.5 * quad

    return log_density


def funnel_x_conditional(v: float):
    """Unnormalized log density of any single x_i given v: -x^2 e^{-v} / 2."""
    inv_var = _exp_neg(v)

    def log_density(t: float) -> float:
        if math.isinf(inv_var):
            return 0.0 if t == 0.0 else -math.inf
        return -0.5 * t * t * inv_var

    return log_density


def unit_gaussian_logpdf(x: float) -> float:
    """Unnormalized standard normal log density."""
    return -0.5 * x * x


def ring_walk_step(x: int, u: float, stream) -> tuple[int, float]:
    """One move of the +-1 walk on the integers mod 100.

    Consumes two stream draws d1, d2, updates u <- (u + d1 - d2) mod 1, and
    steps up if u < 0.5, down otherwise.  The uniform distribution on the
    ring is invariant for any stream; dependence only changes how long the
    walk persists in one direction.
    """
    d1 = stream.next()
    d2 = stream.next()
    u = mod_one(u + d1 - d2)
    if u < 0.5:
        x = (x + 1) % RING_SIZE
    else:
        x = (x - 1) % RING_SIZE
    return x, u


class CorrelatedGaussianPair:
    """Standard bivariate Gaussian with correlation rho.

    Exposes the conditional CDF/quantile of either coordinate given the
    other, which is what coordinate-wise Gibbs kernels consume.
    """

    def __init__(self, rho: float):
        if not -1.0 < rho < 1.0:
            raise ParameterError(f"correlation must be in (-1, 1), got {rho}")
        self.rho = float(rho)
        self._cond_sd = math.sqrt(1.0 - rho * rho)

    def cond_mean(self, state, coord: int) -> float:
        return self.rho * state[1 - coord]

    def cond_cdf(self, state, coord: int, value: float) -> float:
        return norm_cdf((value - self.cond_mean(state, coord)) / self._cond_sd)

    def cond_quantile(self, state, coord: int, u: float) -> float:
        return self.cond_mean(state, coord) + self._cond_sd * norm_ppf(u)

    def logpdf(self, state) -> float:
        a, b = state
        c = 1.0 - self.rho * self.rho
        return -0.5 * (a * a - 2.0 * self.rho * a * b + b * b) / c

    def exact_sample(self, rng) -> tuple[float, float]:
        a = rng.standard_normal()
        b = self.rho * a + self._cond_sd * rng.standard_normal()
        return (float(a), float(b))

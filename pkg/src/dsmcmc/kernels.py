"""Transition kernels exposing the CDF machinery the augmented updates need.

A continuous kernel provides three things for the current point x:
the forward CDF of the transition distribution, its inverse (the map from a
uniform variate to the next point), and the CDF of the matching reverse
kernel.  For reversible kernels the reverse is the kernel itself; otherwise
``reverse_from_target`` builds it from the target density.

Kernels act on one coordinate at a time; multivariate targets are handled
by sweeping coordinate kernels (see ``augmented.sweep``).
"""

from __future__ import annotations

import math
from statistics import NormalDist

import numpy as np
from scipy import integrate, optimize

from .errors import (
    BalanceViolationError,
    KernelError,
    NumericError,
    ParameterError,
    SupportError,
)

_STD_NORMAL = NormalDist()

# Row sums of a probability matrix must match 1 to this tolerance.
PMF_TOL = 1e-12


def norm_cdf(z: float) -> float:
    """Standard normal CDF, accurate to well under 1e-10 on [-8, 8]."""
    return _STD_NORMAL.cdf(z)


def norm_ppf(u: float) -> float:
    """Standard normal quantile; rejects u outside the open unit interval."""
    if not 0.0 < u < 1.0:
        raise NumericError(f"normal quantile undefined at u={u}")
    return _STD_NORMAL.inv_cdf(u)


class ReversibleKernel:
    """Mixin for kernels satisfying detailed balance: reverse == forward."""

    def reverse_cdf(self, x_new, x_old) -> float:
        return self.forward_cdf(x_new, x_old)

    def reverse_quantile(self, u, x_new):
        return self.forward_quantile(u, x_new)


class ARKernel(ReversibleKernel):
    """Gaussian autoregression x' = a*x + sqrt(1-a^2) * z, z ~ N(0,1).

    Leaves the unit Gaussian invariant and is self-reverse.  With a=0 it is
    the independence kernel that redraws x from N(0,1).
    """

    def __init__(self, alpha: float):
        if not 0.0 <= alpha < 1.0:
            raise ParameterError(f"autoregression coefficient must be in [0, 1), got {alpha}")
        self.alpha = float(alpha)
        self.noise_scale = math.sqrt(1.0 - alpha * alpha)

    def forward_quantile(self, u: float, x: float) -> float:
        return self.alpha * x + self.noise_scale * norm_ppf(u)

    def forward_cdf(self, x: float, x_new: float) -> float:
        return norm_cdf((x_new - self.alpha * x) / self.noise_scale)

    def log_density(self, x_new: float, x: float) -> float:
        z = (x_new - self.alpha * x) / self.noise_scale
        return -0.5 * z * z - 0.5 * math.log(2.0 * math.pi) - math.log(self.noise_scale)

    def density(self, x_new: float, x: float) -> float:
        return math.exp(self.log_density(x_new, x))


def ar_forward_quantile(alpha: float, x: float, u: float) -> float:
    """One autoregressive move driven by the uniform u."""
    return ARKernel(alpha).forward_quantile(u, x)


class GibbsCoordinateKernel(ReversibleKernel):
    """Resamples one coordinate of a vector state from its conditional.

    ``cond_cdf(state, value)`` and ``cond_quantile(state, u)`` evaluate the
    conditional distribution of coordinate ``coord`` given the other
    coordinates of ``state``.  Gibbs conditionals are self-reverse.
    """

    def __init__(self, coord: int, cond_cdf, cond_quantile):
        self.coord = coord
        self.cond_cdf = cond_cdf
        self.cond_quantile = cond_quantile

    def forward_quantile(self, u, x):
        new = list(x)
        new[self.coord] = self.cond_quantile(x, u)
        return tuple(new)

    def forward_cdf(self, x, x_new) -> float:
        return self.cond_cdf(x, x_new[self.coord])


def gaussian_conditional_kernel(rho: float, coord: int) -> GibbsCoordinateKernel:
    """Gibbs conditional for one coordinate of a standard bivariate Gaussian.

    The conditional of either coordinate given the other is
    N(rho * other, 1 - rho^2).
    """
    if not -1.0 < rho < 1.0:
        raise ParameterError(f"correlation must be in (-1, 1), got {rho}")
    sd = math.sqrt(1.0 - rho * rho)
    other = 1 - coord

    def cond_cdf(state, value):
        return norm_cdf((value - rho * state[other]) / sd)

    def cond_quantile(state, u):
        return rho * state[other] + sd * norm_ppf(u)

    return GibbsCoordinateKernel(coord, cond_cdf, cond_quantile)


class DiscreteKernel:
    """Base for kernels over an ordered finite support.

    The support ordering is part of the contract: the uniform-interval
    construction in ``augmented.step_discrete`` depends on it.
    """

    support: tuple

    def index(self, x) -> int:
        try:
            return self._index[x]
        except (AttributeError, KeyError):
            raise SupportError(f"state {x!r} is not in the kernel support") from None

    def forward_pmf(self, x) -> np.ndarray:
        raise NotImplementedError

    def reverse_pmf(self, x_new) -> np.ndarray:
        raise NotImplementedError


class TabularKernel(DiscreteKernel):
    """Discrete kernel given by explicit forward and reverse row matrices.

    ``forward[i, j]`` is the probability of moving to support[j] from
    support[i]; ``reverse`` likewise for the reverse kernel.  If ``reverse``
    is omitted the kernel is taken to be reversible.
    """

    def __init__(self, support, forward, reverse=None):
        self.support = tuple(support)
        self._index = {x: i for i, x in enumerate(self.support)}
        if len(self._index) != len(self.support):
            raise ParameterError("kernel support contains duplicate states")
        self.forward = _validated_matrix(np.asarray(forward, dtype=float), len(self.support))
        if reverse is None:
            reverse = self.forward
        self.reverse = _validated_matrix(np.asarray(reverse, dtype=float), len(self.support))

    def forward_pmf(self, x) -> np.ndarray:
        return self.forward[self.index(x)]

    def reverse_pmf(self, x_new) -> np.ndarray:
        return self.reverse[self.index(x_new)]


def _validated_matrix(matrix: np.ndarray, n: int) -> np.ndarray:
    if matrix.shape != (n, n):
        raise ParameterError(f"kernel matrix must be {n}x{n}, got {matrix.shape}")
    if np.any(matrix < 0):
        raise ParameterError("kernel matrix has negative entries")
    sums = matrix.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > PMF_TOL):
        raise KernelError(f"kernel rows must sum to 1 within {PMF_TOL}; got {sums}")
    return matrix


def stationary_distribution(forward: np.ndarray) -> np.ndarray:
    """Stationary distribution of a row-stochastic matrix (pi @ T = pi)."""
    forward = np.asarray(forward, dtype=float)
    n = forward.shape[0]
    # Solve pi (T - I) = 0 with the normalization sum(pi) = 1 appended.
    a = np.vstack([forward.T - np.eye(n), np.ones(n)])
    b = np.concatenate([np.zeros(n), [1.0]])
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    if np.any(pi < -1e-10):
        raise KernelError("stationary distribution has negative entries; chain may be reducible")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def reverse_transition_matrix(forward: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Reverse kernel matrix: R[i, j] = T[j, i] * target[j] / target[i].

    ``target`` must be invariant under ``forward``; that is exactly the
    condition for the rows of the result to normalize.
    """
    forward = np.asarray(forward, dtype=float)
    target = np.asarray(target, dtype=float)
    if np.any(target <= 0):
        raise SupportError("target must be positive on the whole support")
    target = target / target.sum()
    reverse = forward.T * target[np.newaxis, :] / target[:, np.newaxis]
    sums = reverse.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-9):
        raise BalanceViolationError(
            "target is not invariant under the forward kernel; reverse rows sum to "
            f"{sums}"
        )
    return reverse


class NumericReverseKernel:
    """Reverse of a continuous kernel, built from density ratios.

    The reverse density is forward_density(x_old_candidate -> x_new) scaled
    by the target ratio; its CDF and quantile are evaluated by quadrature
    and root finding.  Intended for validation work, not hot loops.
    """

    def __init__(self, forward, log_target, lower=-40.0, upper=40.0):
        self._forward = forward
        self._log_target = log_target
        self._lower = lower
        self._upper = upper

    def density(self, x_old: float, x_new: float) -> float:
        lt_old = self._log_target(x_old)
        lt_new = self._log_target(x_new)
        if not math.isfinite(lt_new):
            raise SupportError(f"target has no mass at {x_new}")
        if not math.isfinite(lt_old):
            return 0.0
        return self._forward.density(x_new, x_old) * math.exp(lt_old - lt_new)

    def forward_cdf(self, x_new: float, limit: float) -> float:
        value, _ = integrate.quad(
            lambda t: self.density(t, x_new), self._lower, limit, limit=200
        )
        return min(max(value, 0.0), 1.0)

    def forward_quantile(self, u: float, x_new: float) -> float:
        if not 0.0 < u < 1.0:
            raise NumericError(f"quantile undefined at u={u}")
        return optimize.brentq(
            lambda t: self.forward_cdf(x_new, t) - u, self._lower, self._upper
        )


def reverse_from_target(forward, target):
    """Build the reverse kernel T~(x <- x') = T(x' <- x) pi(x) / pi(x').

    Accepts either a discrete kernel (or raw row-stochastic matrix) with a
    probability vector, or a continuous kernel exposing ``density`` with a
    log-density callable.  Reversible kernels come back unchanged in law.
    """
    if isinstance(forward, DiscreteKernel):
        reverse = reverse_transition_matrix(forward.forward, np.asarray(target, dtype=float))
        return TabularKernel(forward.support, forward.forward, reverse)
    if isinstance(forward, np.ndarray) or (
        isinstance(forward, (list, tuple)) and not hasattr(forward, "density")
    ):
        return reverse_transition_matrix(np.asarray(forward, dtype=float), target)
    if hasattr(forward, "density") and callable(target):
        return NumericReverseKernel(forward, target)
    raise ParameterError("unsupported forward kernel / target combination")


def conditional_pmf(joint: np.ndarray, axis: int, index: int) -> np.ndarray:
    """Conditional pmf of one variable of a 2-d joint table.

    ``axis`` is the variable being resampled; ``index`` fixes the other
    variable.  This is just renormalization of the matching row or column.
    """
    joint = np.asarray(joint, dtype=float)
    row = joint[index, :] if axis == 1 else joint[:, index]
    total = row.sum()
    if total <= 0:
        raise SupportError("conditioning event has zero probability")
    return row / total


def gibbs_conditional_kernel(target, coord: int):
    """Gibbs kernel resampling ``coord`` from its conditional under ``target``.

    ``target`` must expose ``cond_cdf(state, coord, value)`` and
    ``cond_quantile(state, coord, u)``; targets without tractable
    conditionals should use the slice sampler instead.
    """
    if not (hasattr(target, "cond_cdf") and hasattr(target, "cond_quantile")):
        raise ParameterError(
            "target does not expose tractable conditionals; use slice sampling"
        )

    def cond_cdf(state, value):
        return target.cond_cdf(state, coord, value)

    def cond_quantile(state, u):
        return target.cond_quantile(state, coord, u)

    return GibbsCoordinateKernel(coord, cond_cdf, cond_quantile)

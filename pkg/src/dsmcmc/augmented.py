"""Core construction: run the chain on (x, u) instead of x alone.

Instead of consuming fresh Uniform[0,1) variates, the chain keeps its
driving uniform as part of the state and refreshes it by adding a stream
output modulo one (``shift_uniform``).  A transition then moves x through
the kernel's inverse CDF at u and overwrites u with the value that would
drive the matching reverse kernel from x' back to x (``step_continuous`` /
``step_discrete``).  Both pieces leave the joint distribution
target(x) x Uniform[0,1) invariant for any fixed stream output, which is
what makes arbitrary dependent streams safe to use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import (
    BalanceViolationError,
    DegenerateKernelError,
    KernelError,
    NumericError,
    ParameterError,
)
from .kernels import DiscreteKernel

# Largest double below 1: computed uniforms are clamped into [0, 1 - ulp]
# so floating-point spill can never push them onto the closed boundary.
ONE_MINUS_ULP = math.nextafter(1.0, 0.0)


@dataclass
class AugmentedState:
    """A chain value paired with its auxiliary uniform in [0, 1)."""

    x: Any
    u: float


def mod_one(r: float) -> float:
    """Fractional part r - floor(r), always in [0, 1).

    Examples: mod_one(9.1) = 0.1, mod_one(-8.3) = 0.7.
    """
    if not math.isfinite(r):
        raise NumericError(f"mod_one requires a finite value, got {r}")
    f = r - math.floor(r)
    # Rounding can land exactly on 1.0 for tiny negative inputs.
    return 0.0 if f >= 1.0 else f


def clamp_unit(value: float) -> float:
    """Clamp a computed uniform into [0, 1 - ulp]."""
    if value <= 0.0:
        return 0.0
    if value >= 1.0:
        return ONE_MINUS_ULP
    return value


def shift_uniform(u: float, d: float) -> float:
    """Refresh an auxiliary uniform with a stream output: (u + d) mod 1.

    Adding any fixed real to a Uniform[0,1) variate modulo one leaves it
    uniform, so this injects stream randomness without touching the
    equilibrium distribution.
    """
    if not 0.0 <= u < 1.0:
        raise ParameterError(f"auxiliary uniform must be in [0, 1), got {u}")
    return mod_one(u + d)


def step_continuous(kernel, state: AugmentedState) -> AugmentedState:
    """Move x through the kernel at u; reset u to drive the reverse move.

    The new pair is x' = forward_quantile(u; x) together with
    u' = reverse_cdf evaluated at the old x, i.e. the uniform that would
    map x' back to x under the reverse kernel.  The map is a bijection of
    (x, u) whose Jacobian exactly cancels the transition densities, so the
    joint target is preserved.
    """
    x_new = kernel.forward_quantile(state.u, state.x)
    u_new = kernel.reverse_cdf(x_new, state.x)
    if isinstance(u_new, float) and not math.isfinite(u_new):
        raise KernelError(f"reverse CDF returned non-finite value {u_new}")
    if not -1e-9 <= u_new <= 1.0 + 1e-9:
        raise KernelError(f"reverse CDF returned {u_new}, outside [0, 1]")
    return AugmentedState(x_new, clamp_unit(float(u_new)))


def step_discrete(kernel: DiscreteKernel, state: AugmentedState) -> AugmentedState:
    """Discrete analogue of step_continuous.

    u selects the new state by inverse-CDF lookup over the kernel's support
    ordering; u' is placed the same relative distance through the reverse
    kernel's interval for the old state, which makes the move exactly
    reversible in pure interval arithmetic.
    """
    probs = np.asarray(kernel.forward_pmf(state.x), dtype=float)
    cum = np.cumsum(probs)
    j = int(np.searchsorted(cum, state.u, side="right"))
    while j < len(probs) and probs[j] <= 0.0:
        j += 1
    if j >= len(probs):
        # u landed beyond the last positive interval (row sums to 1 only
        # within tolerance); the last positive state owns the remainder.
        j = int(np.max(np.nonzero(probs)[0])) if np.any(probs > 0) else len(probs)
        if j >= len(probs):
            raise DegenerateKernelError("forward pmf has no positive entries")
    width = probs[j]
    if width <= 0.0:
        raise DegenerateKernelError(
            f"selected a zero-probability interval for state {kernel.support[j]!r}"
        )
    u_min = float(cum[j - 1]) if j > 0 else 0.0
    x_new = kernel.support[j]

    rprobs = np.asarray(kernel.reverse_pmf(x_new), dtype=float)
    i = kernel.index(state.x)
    r_width = rprobs[i]
    if r_width <= 0.0:
        raise BalanceViolationError(
            f"reverse kernel gives zero mass to {state.x!r} from {x_new!r} "
            "while the forward move has positive probability"
        )
    r_min = float(np.cumsum(rprobs)[i - 1]) if i > 0 else 0.0
    u_new = r_min + r_width * ((state.u - u_min) / width)
    return AugmentedState(x_new, clamp_unit(u_new))


def kernel_step(kernel, state: AugmentedState) -> AugmentedState:
    """Dispatch to the discrete or continuous update for this kernel."""
    if isinstance(kernel, DiscreteKernel):
        return step_discrete(kernel, state)
    return step_continuous(kernel, state)


def sweep(kernels, state: AugmentedState, stream) -> AugmentedState:
    """Apply uniform-refresh then kernel-step for each kernel in order.

    One stream draw is consumed per kernel.  An empty kernel list leaves the
    state unchanged.
    """
    for kernel in kernels:
        state = AugmentedState(state.x, shift_uniform(state.u, stream.next()))
        state = kernel_step(kernel, state)
    return state

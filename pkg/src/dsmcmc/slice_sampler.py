"""Univariate slice sampling with linear stepping out, driven by a stream.

A slice update needs a random number of uniforms (threshold, bracket
placement, one per proposal).  To stay correct under a dependent stream the
sampler carries a fixed budget of K uniforms in its state, refreshes each
one by mod-one stream addition just before use, and, when a proposal is
accepted, rewrites the used entries to the values that would steer the
mirror-image update from x' back to x.  If all K variates are used without
finding an acceptable point the update gives up and the chain stays put for
a step; those rejections are part of what keeps the target invariant.

``naive_slice_step`` is the uncorrected baseline: a standard stepping-out
slice sampler that simply consumes stream outputs where uniforms are
expected.  It is exact for an i.i.d. uniform stream and intentionally
biased otherwise; the experiments use it to demonstrate that failure mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .augmented import clamp_unit, mod_one
from .errors import (
    ExpansionLimitError,
    InvalidStateError,
    ParameterError,
    ReplayError,
)

DEFAULT_MAX_EXPANSIONS = 10**6


@dataclass
class SliceParams:
    """Step size, uniform budget, and the bracket-expansion safety cap."""

    w: float = 1.0
    k_max: int = 10
    max_expansions: int = DEFAULT_MAX_EXPANSIONS

    def __post_init__(self):
        if not self.w > 0:
            raise ParameterError(f"step size w must be positive, got {self.w}")
        if self.k_max < 3:
            raise ParameterError(
                f"need at least 3 uniforms (threshold, bracket, proposal), got {self.k_max}"
            )
        if self.max_expansions < 1:
            raise ParameterError("max_expansions must be at least 1")


@dataclass
class SliceState:
    """Chain value plus the K auxiliary uniforms."""

    x: float
    u: list[float] = field(default_factory=list)


def _scan(x, u, log_density, params, refresh):
    """Shared forward machinery for slice_step and its reversal.

    ``refresh(i, value)`` is applied to u[i] immediately before use; the
    forward pass folds in a stream draw, the reverse pass is the identity.
    Mutates ``u`` in place.  Returns (accepted, x_out, refresh_count).
    """
    lp_x = log_density(x)
    if math.isnan(lp_x) or lp_x == -math.inf:
        raise InvalidStateError(f"target has no mass at the current point {x}")

    # Threshold: y = u1 * density(x), tracked in log space.
    u[0] = refresh(0, u[0])
    log_y = -math.inf if u[0] <= 0.0 else math.log(u[0]) + lp_x

    # Initial bracket of width w placed uniformly around x, then stepped out.
    u[1] = refresh(1, u[1])
    w = params.w
    x_left_init = x - u[1] * w
    x_lo = x_left_init
    x_hi = x_left_init + w
    expansions = 0
    while log_density(x_lo) > log_y:
        x_lo -= w
        expansions += 1
        if expansions > params.max_expansions:
            raise ExpansionLimitError(
                f"bracket expansion exceeded {params.max_expansions} steps"
            )
    while log_density(x_hi) > log_y:
        x_hi += w
        expansions += 1
        if expansions > params.max_expansions:
            raise ExpansionLimitError(
                f"bracket expansion exceeded {params.max_expansions} steps"
            )

    k = 2
    while True:
        k += 1
        if k > params.k_max:
            # Uniform budget exhausted: give up, keep x, keep refreshed u's.
            return False, x, params.k_max
        u[k - 1] = refresh(k - 1, u[k - 1])
        x_new = x_lo + u[k - 1] * (x_hi - x_lo)
        lp_new = log_density(x_new)
        if lp_new < log_y:
            # Rejected: shrink the bracket onto the proposal and retry.
            if x_new > x:
                x_hi = x_new
            else:
                x_lo = x_new
            continue
        # Accepted: store the uniforms that would reverse this update.
        u[0] = clamp_unit(math.exp(log_y - lp_new))
        u[1] = mod_one((x_new - x_left_init) / w)
        u[k - 1] = clamp_unit((x - x_lo) / (x_hi - x_lo))
        return True, x_new, k


def slice_step(state: SliceState, log_density, params: SliceParams, stream) -> SliceState:
    """One dependent-stream slice update of a scalar coordinate.

    ``log_density`` is the log of the unnormalized target along the
    coordinate; additive constants are irrelevant.  Consumes between 3 and
    K stream draws.
    """
    u = list(state.u)
    if len(u) != params.k_max:
        raise ParameterError(
            f"state carries {len(u)} uniforms but params.k_max is {params.k_max}"
        )

    def refresh(_i, value):
        return mod_one(value + stream.next())

    _accepted, x_out, _count = _scan(state.x, u, log_density, params, refresh)
    return SliceState(x_out, u)


def slice_step_reverse(
    state: SliceState, log_density, params: SliceParams, recorded_draws
) -> SliceState:
    """Undo one slice_step given the stream values it consumed.

    Replays the update without stream refreshes, which lands back on the
    pre-move x and restores the post-refresh uniforms; the refreshes are
    then unwound in time-reverse order with u <- (u - d) mod 1.  Test
    machinery: composing slice_step with this function is the identity up
    to floating-point noise.
    """
    u = list(state.u)
    if len(u) != params.k_max:
        raise ParameterError(
            f"state carries {len(u)} uniforms but params.k_max is {params.k_max}"
        )
    _accepted, x_out, count = _scan(state.x, u, log_density, params, lambda _i, v: v)
    if count != len(recorded_draws):
        raise ReplayError(
            f"step consumed {count} draws but the log holds {len(recorded_draws)}"
        )
    for i in reversed(range(count)):
        u[i] = mod_one(u[i] - recorded_draws[i])
    return SliceState(x_out, u)


def naive_slice_step(
    x: float,
    log_density,
    w: float,
    stream,
    max_expansions: int = DEFAULT_MAX_EXPANSIONS,
) -> float:
    """Standard stepping-out slice update fed directly from the stream.

    No augmentation, no bookkeeping: wherever the textbook algorithm wants
    a fresh Uniform[0,1) it takes mod_one of the next stream output.  Only
    exact when the stream really is i.i.d. uniform.
    """
    if not w > 0:
        raise ParameterError(f"step size w must be positive, got {w}")
    lp_x = log_density(x)
    if math.isnan(lp_x) or lp_x == -math.inf:
        raise InvalidStateError(f"target has no mass at the current point {x}")

    u1 = mod_one(stream.next())
    log_y = -math.inf if u1 <= 0.0 else math.log(u1) + lp_x

    x_lo = x - mod_one(stream.next()) * w
    x_hi = x_lo + w
    expansions = 0
    while log_density(x_lo) > log_y:
        x_lo -= w
        expansions += 1
        if expansions > max_expansions:
            raise ExpansionLimitError(f"bracket expansion exceeded {max_expansions} steps")
    while log_density(x_hi) > log_y:
        x_hi += w
        expansions += 1
        if expansions > max_expansions:
            raise ExpansionLimitError(f"bracket expansion exceeded {max_expansions} steps")

    shrinks = 0
    while True:
        x_new = x_lo + mod_one(stream.next()) * (x_hi - x_lo)
        if log_density(x_new) >= log_y:
            return x_new
        if x_new > x:
            x_hi = x_new
        else:
            x_lo = x_new
        shrinks += 1
        if shrinks > max_expansions:
            raise ExpansionLimitError(f"bracket shrinkage exceeded {max_expansions} steps")

"""Metropolis-Hastings on the augmented triple (x, u_q, u_a).

The proposal uniform u_q and the acceptance uniform u_a live in the chain
state and are refreshed by mod-one stream addition before each step.  The
step itself is a deterministic transform: u_q proposes x' through the
proposal's inverse CDF, u_a decides acceptance, and on acceptance both
uniforms are rewritten to the values that would propose and accept the
reverse move.  On rejection x stays put and only the refreshed uniforms
change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .augmented import clamp_unit, shift_uniform
from .errors import InvalidStateError, NumericError, ProposalSupportError
from .kernels import norm_cdf, norm_ppf


@dataclass
class MHState:
    """Chain value plus its proposal and acceptance uniforms."""

    x: float
    u_q: float
    u_a: float


class GaussianRandomWalkProposal:
    """Proposal x' ~ N(x, sigma^2), symmetric in (x, x')."""

    def __init__(self, sigma: float):
        if not sigma > 0:
            raise NumericError(f"proposal scale must be positive, got {sigma}")
        self.sigma = float(sigma)
        self._log_norm = -0.5 * math.log(2.0 * math.pi) - math.log(sigma)

    def log_density(self, x_new: float, x: float) -> float:
        z = (x_new - x) / self.sigma
        return self._log_norm - 0.5 * z * z

    def cdf(self, x_new: float, x: float) -> float:
        return norm_cdf((x_new - x) / self.sigma)

    def quantile(self, u: float, x: float) -> float:
        return x + self.sigma * norm_ppf(u)


def acceptance_prob(log_target, proposal, x: float, x_new: float) -> float:
    """min(1, q(x; x') pi(x') / (q(x'; x) pi(x)))."""
    log_fwd = proposal.log_density(x_new, x)
    if log_fwd == -math.inf:
        raise ProposalSupportError(f"proposal density is zero at {x_new} from {x}")
    lt_x = log_target(x)
    if not math.isfinite(lt_x):
        raise InvalidStateError(f"target has no mass at the current point {x}")
    log_ratio = proposal.log_density(x, x_new) + log_target(x_new) - log_fwd - lt_x
    return min(1.0, math.exp(min(log_ratio, 0.0)))


def mh_step(state: MHState, log_target, proposal, stream) -> MHState:
    """One dependent-stream Metropolis-Hastings update.

    Two stream draws are consumed: one refreshes u_q, one refreshes u_a
    (in that order, fixed for reproducibility).  Rejection keeps x and the
    refreshed uniforms; acceptance returns

        x'   = proposal quantile at u_q,
        u_a' = u_a * pi(x) q(x'; x) / (pi(x') q(x; x')),
        u_q' = proposal CDF at the old x from x',

    so replaying the transform without refreshes undoes the move.
    """
    u_q = shift_uniform(state.u_q, stream.next())
    u_a = shift_uniform(state.u_a, stream.next())

    x_new = proposal.quantile(u_q, state.x)
    log_fwd = proposal.log_density(x_new, state.x)
    if log_fwd == -math.inf:
        raise ProposalSupportError(f"proposal density is zero at {x_new} from {state.x}")
    lt_x = log_target(state.x)
    if not math.isfinite(lt_x):
        raise InvalidStateError(f"target has no mass at the current point {state.x}")
    log_ratio = proposal.log_density(state.x, x_new) + log_target(x_new) - log_fwd - lt_x
    accept_prob = min(1.0, math.exp(min(log_ratio, 0.0)))

    if u_a > accept_prob:
        return MHState(state.x, u_q, u_a)

    u_a_new = u_a * math.exp(-log_ratio)
    u_q_new = proposal.cdf(state.x, x_new)
    return MHState(x_new, clamp_unit(u_q_new), clamp_unit(u_a_new))

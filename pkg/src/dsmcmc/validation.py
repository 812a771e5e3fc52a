"""Independent oracles used by the test suite and the `validate` command.

``brute_force_discrete_step`` re-derives the discrete augmented update by
literal prefix-sum arithmetic, as a cross-check on the production path.
``invariance_check`` pushes exact samples of the joint target through a
state-update function and tests that the chain-value and uniform marginals
are unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import kolmogi

from .errors import (
    BalanceViolationError,
    DegenerateKernelError,
    ParameterError,
    SupportError,
)
from .kernels import TabularKernel, reverse_transition_matrix, stationary_distribution
from .streams import ReplayStream
from .targets import THREE_STATE, TWO_STATE_HEAVY, TWO_STATE_SKEWED


def brute_force_discrete_step(kernel, x, u):
    """Discrete augmented update by explicit enumeration.

    Walks the support in order accumulating forward probabilities to locate
    the interval containing u, then rebuilds the reverse interval the same
    way and maps u to the same relative position inside it.  Kept naive on
    purpose: this is the oracle the fast path is checked against.
    """
    support = kernel.support
    forward = kernel.forward_pmf(x)
    x_new = None
    u_min = 0.0
    u_max = 0.0
    cum = 0.0
    for idx, candidate in enumerate(support):
        prob = float(forward[idx])
        if cum <= u < cum + prob:
            x_new = candidate
            u_min = cum
            u_max = cum + prob
            break
        cum += prob
    if x_new is None:
        # u fell beyond the accumulated total (rounding at the top end).
        for idx in reversed(range(len(support))):
            if forward[idx] > 0.0:
                x_new = support[idx]
                u_max = cum
                u_min = cum - float(forward[idx])
                break
    if x_new is None or u_max <= u_min:
        raise DegenerateKernelError("no positive-probability interval contains u")

    reverse = kernel.reverse_pmf(x_new)
    r_min = 0.0
    r_width = None
    for idx, candidate in enumerate(support):
        if candidate == x:
            r_width = float(reverse[idx])
            break
        r_min += float(reverse[idx])
    if r_width is None:
        raise SupportError(f"state {x!r} is not in the kernel support")
    if r_width <= 0.0:
        raise BalanceViolationError(
            f"reverse kernel gives zero mass to {x!r} from {x_new!r}"
        )
    r_max = r_min + r_width
    u_new = r_min + (r_max - r_min) * (u - u_min) / (u_max - u_min)
    return x_new, u_new


@dataclass
class PushforwardReport:
    """Outcome of an invariance check on one operator."""

    ks_statistic: float
    sample_count: int
    passed: bool
    significance: float
    x_pvalue: float
    u_statistic: float
    u_pvalue: float


def ks_critical_value(alpha: float, n: int) -> float:
    """Asymptotic Kolmogorov critical value for sample size n."""
    return float(kolmogi(alpha)) / math.sqrt(n)


def _vectorized_cdf(cdf):
    """Accept scalar-only CDF callables; kstest evaluates on whole arrays."""

    def wrapped(values):
        arr = np.asarray(values, dtype=float)
        try:
            out = np.asarray(cdf(arr), dtype=float)
            if out.shape == arr.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.fromiter((cdf(float(v)) for v in arr.ravel()), dtype=float,
                           count=arr.size).reshape(arr.shape)

    return wrapped


def _collect_uniforms(state) -> list[float]:
    if hasattr(state, "u_q"):
        return [state.u_q, state.u_a]
    u = state.u
    if isinstance(u, (list, tuple, np.ndarray)):
        return [float(v) for v in u]
    return [float(u)]


def invariance_check(
    operator,
    exact_sampler,
    n: int,
    *,
    d_sequence=None,
    stream_factory=None,
    significance: float = 0.01,
    target_cdf=None,
    target_support=None,
    target_pmf=None,
    seed: int = 0,
) -> PushforwardReport:
    """Push n exact joint samples through an operator and test the marginals.

    ``operator(state, stream) -> state`` is applied once per sample; every
    sample sees the same fixed ``d_sequence`` (replayed cyclically), or a
    per-sample stream from ``stream_factory(i)``.  The pushed chain values
    are compared against the target (KS for continuous via ``target_cdf``,
    chi-squared for discrete via ``target_support``/``target_pmf``) and all
    pushed uniforms against Uniform[0,1).  Each marginal is tested at
    significance/2 so the joint false-failure rate stays at the requested
    level.
    """
    if n < 10**4:
        raise ParameterError(f"invariance check needs at least 1e4 samples, got {n}")
    if (d_sequence is None) == (stream_factory is None):
        raise ParameterError("provide exactly one of d_sequence or stream_factory")
    continuous = target_cdf is not None
    if not continuous and (target_support is None or target_pmf is None):
        raise ParameterError("discrete checks need target_support and target_pmf")

    rng = np.random.default_rng(seed)
    replay = None
    if d_sequence is not None:
        replay = ReplayStream(d_sequence, on_exhaust="cycle")
    xs = []
    us: list[float] = []
    for i in range(n):
        state = exact_sampler(rng)
        if replay is not None:
            replay.reset()
            stream = replay
        else:
            stream = stream_factory(i)
        out = operator(state, stream)
        xs.append(out.x)
        us.extend(_collect_uniforms(out))

    alpha_each = significance / 2.0
    if continuous:
        x_stat, x_pvalue = stats.kstest(np.asarray(xs, dtype=float), _vectorized_cdf(target_cdf))
    else:
        support = list(target_support)
        index = {s: k for k, s in enumerate(support)}
        counts = np.zeros(len(support))
        for value in xs:
            counts[index[value]] += 1
        expected = np.asarray(target_pmf, dtype=float) * n
        x_stat, x_pvalue = stats.chisquare(counts, expected)

    if us:
        u_stat, u_pvalue = stats.kstest(np.asarray(us), "uniform")
    else:
        # Operator state carries no uniforms (e.g. the uncorrected slice
        # baseline); only the chain-value marginal is testable.
        u_stat, u_pvalue = 0.0, 1.0
    passed = bool(x_pvalue >= alpha_each and u_pvalue >= alpha_each)
    return PushforwardReport(
        ks_statistic=float(x_stat),
        sample_count=n,
        passed=passed,
        significance=significance,
        x_pvalue=float(x_pvalue),
        u_statistic=float(u_stat),
        u_pvalue=float(u_pvalue),
    )


def _metropolis_matrix(target: np.ndarray, proposal: np.ndarray) -> np.ndarray:
    """Reversible Metropolis chain for ``target`` from a symmetric proposal."""
    target = np.asarray(target, dtype=float)
    n = len(target)
    matrix = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j and proposal[i, j] > 0:
                matrix[i, j] = proposal[i, j] * min(1.0, target[j] / target[i])
        matrix[i, i] = 1.0 - matrix[i].sum()
    return matrix


def enumerated_small_kernels() -> list[tuple[str, TabularKernel, np.ndarray]]:
    """The fixed family of small kernels (supports of 2 to 5 states).

    Each entry is (name, kernel, target) with the target invariant under the
    kernel's forward matrix and the reverse built by the density-ratio
    formula (so non-reversible cases genuinely exercise it).  The oracle
    agreement sweeps in the test suite run over every entry.
    """
    cases = []

    def add(name, forward, target):
        forward = np.asarray(forward, dtype=float)
        target = np.asarray(target, dtype=float)
        reverse = reverse_transition_matrix(forward, target)
        support = tuple(range(forward.shape[0]))
        cases.append((name, TabularKernel(support, forward, reverse), target))

    add("2-state symmetric", [[0.5, 0.5], [0.5, 0.5]], np.array([0.5, 0.5]))
    add(
        "2-state independence (1/3, 2/3)",
        np.tile(TWO_STATE_SKEWED, (2, 1)),
        TWO_STATE_SKEWED,
    )
    add("2-state lazy heavy", [[0.9, 0.1], [0.5, 0.5]], TWO_STATE_HEAVY)
    add("3-state independence", np.tile(THREE_STATE, (3, 1)), THREE_STATE)
    add(
        "3-state metropolis full proposal",
        _metropolis_matrix(THREE_STATE, np.full((3, 3), 0.5) - 0.5 * np.eye(3)),
        THREE_STATE,
    )
    add(
        "3-state metropolis path proposal",
        _metropolis_matrix(
            THREE_STATE, np.array([[0.0, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.0]])
        ),
        THREE_STATE,
    )
    # Non-reversible rotation mixture; doubly stochastic, uniform target.
    cycle = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    add(
        "3-state rotation mixture",
        0.6 * np.eye(3) + 0.3 * cycle + 0.1 * cycle @ cycle,
        np.full(3, 1.0 / 3.0),
    )
    # Seeded random chains with their stationary laws, up to support size 5.
    rng = np.random.default_rng(20240611)
    for trial in range(3):
        raw = rng.random((3, 3)) + 0.05
        forward = raw / raw.sum(axis=1, keepdims=True)
        add(f"3-state random #{trial}", forward, stationary_distribution(forward))
    for size in (4, 5):
        raw = rng.random((size, size)) + 0.05
        forward = raw / raw.sum(axis=1, keepdims=True)
        add(f"{size}-state random", forward, stationary_distribution(forward))
    return cases

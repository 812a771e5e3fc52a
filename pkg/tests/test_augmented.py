import math

import numpy as np
import pytest
from scipy import stats

from dsmcmc.augmented import (
    AugmentedState,
    clamp_unit,
    mod_one,
    shift_uniform,
    step_continuous,
    step_discrete,
    sweep,
)
from dsmcmc.errors import (
    BalanceViolationError,
    DegenerateKernelError,
    NumericError,
    ParameterError,
)
from dsmcmc.kernels import (
    ARKernel,
    TabularKernel,
    gaussian_conditional_kernel,
    norm_cdf,
    reverse_transition_matrix,
)
from dsmcmc.streams import ConstantStream, IidUniformStream
from dsmcmc.targets import TWO_STATE_SKEWED


def test_mod_one_wraparound_cases():
    assert mod_one(9.1) == pytest.approx(0.1, abs=1e-12)
    assert mod_one(-8.3) == pytest.approx(0.7, abs=1e-12)
    assert mod_one(0.5) == 0.5


def test_mod_one_stays_in_unit_interval():
    # Rounding of tiny negatives must not produce exactly 1.0.
    assert mod_one(-1e-18) < 1.0
    for r in np.linspace(-5, 5, 1001):
        assert 0.0 <= mod_one(float(r)) < 1.0


def test_mod_one_rejects_non_finite():
    with pytest.raises(NumericError):
        mod_one(math.inf)


def test_shift_uniform_cases():
    assert shift_uniform(0.6, 0.7) == pytest.approx(0.3, abs=1e-12)
    for u in (0.0, 0.25, 0.9999):
        assert shift_uniform(u, 0.0) == u
    assert shift_uniform(0.25, -8.3) == pytest.approx(0.95, abs=1e-12)


def test_shift_uniform_domain_check():
    with pytest.raises(ParameterError):
        shift_uniform(1.0, 0.1)


def test_clamp_unit_boundaries():
    assert clamp_unit(1.0) < 1.0
    assert clamp_unit(-1e-20) == 0.0
    assert clamp_unit(0.5) == 0.5


def test_step_continuous_ar_kernel_values():
    # alpha=0.6 from (x=1, u=0.5): x' = 0.6, u' = Phi(0.8)
    out = step_continuous(ARKernel(0.6), AugmentedState(1.0, 0.5))
    assert out.x == pytest.approx(0.6, abs=1e-12)
    assert out.u == pytest.approx(norm_cdf(0.8), abs=1e-12)
    assert out.u == pytest.approx(0.78814, abs=5e-6)


def test_step_continuous_independence_kernel():
    out = step_continuous(ARKernel(0.0), AugmentedState(1.7, 0.5))
    assert out.x == pytest.approx(0.0, abs=1e-12)
    assert out.u == pytest.approx(norm_cdf(1.7), abs=1e-12)
    assert out.u == pytest.approx(0.95543, abs=5e-6)


def test_step_continuous_round_trip():
    kernel = ARKernel(0.6)
    state = AugmentedState(1.0, 0.5)
    mid = step_continuous(kernel, state)
    back = step_continuous(kernel, mid)
    assert back.x == pytest.approx(state.x, abs=1e-9)
    assert back.u == pytest.approx(state.u, abs=1e-9)


def _independence_kernel(probs):
    probs = np.asarray(probs, dtype=float)
    matrix = np.tile(probs, (len(probs), 1))
    return TabularKernel(tuple(range(len(probs))), matrix,
                         reverse_transition_matrix(matrix, probs))


def test_step_discrete_symmetric_two_state():
    kernel = TabularKernel((0, 1), [[0.5, 0.5], [0.5, 0.5]])
    out = step_discrete(kernel, AugmentedState(0, 0.3))
    assert out.x == 0
    assert out.u == pytest.approx(0.3, abs=1e-15)


def test_step_discrete_skewed_independence():
    kernel = _independence_kernel(TWO_STATE_SKEWED)
    out = step_discrete(kernel, AugmentedState(0, 0.5))
    assert out.x == 1
    assert out.u == pytest.approx(1.0 / 12.0, abs=1e-15)


def test_step_discrete_left_endpoint_owns_interval():
    kernel = _independence_kernel(TWO_STATE_SKEWED)
    # u exactly at the boundary 1/3 belongs to the second interval.
    out = step_discrete(kernel, AugmentedState(0, 1.0 / 3.0))
    assert out.x == 1
    out = step_discrete(kernel, AugmentedState(0, 0.0))
    assert out.x == 0


def test_step_discrete_round_trip_exact():
    kernel = _independence_kernel(TWO_STATE_SKEWED)
    rng = np.random.default_rng(3)
    for _ in range(200):
        x = int(rng.integers(2))
        u = float(rng.random())
        mid = step_discrete(kernel, AugmentedState(x, u))
        reverse_kernel = TabularKernel(kernel.support, kernel.reverse, kernel.forward)
        back = step_discrete(reverse_kernel, mid)
        assert back.x == x
        assert back.u == pytest.approx(u, abs=1e-12)


def test_step_discrete_degenerate_kernel_error():
    class ZeroKernel:
        support = (0, 1)

        def forward_pmf(self, _x):
            return np.zeros(2)

        def reverse_pmf(self, _x):
            return np.zeros(2)

        def index(self, x):
            return x

    with pytest.raises(DegenerateKernelError):
        step_discrete(ZeroKernel(), AugmentedState(0, 0.5))


def test_step_discrete_balance_violation_error():
    # Forward can reach state 1 from 0, but the declared reverse gives it
    # zero mass for returning.
    forward = np.array([[0.5, 0.5], [0.5, 0.5]])
    reverse = np.array([[1.0, 0.0], [0.0, 1.0]])
    kernel = TabularKernel((0, 1), forward, reverse)
    with pytest.raises(BalanceViolationError):
        step_discrete(kernel, AugmentedState(0, 0.75))


def test_discrete_jacobian_matches_density_ratio():
    # Within one interval, du'/du must equal reverse_prob / forward_prob.
    kernel = _independence_kernel(np.array([0.2, 0.3, 0.5]))
    x, u, eps = 1, 0.55, 1e-7
    lo = step_discrete(kernel, AugmentedState(x, u - eps))
    hi = step_discrete(kernel, AugmentedState(x, u + eps))
    assert hi.x == lo.x
    slope = (hi.u - lo.u) / (2 * eps)
    forward_prob = kernel.forward_pmf(x)[kernel.index(hi.x)]
    reverse_prob = kernel.reverse_pmf(hi.x)[kernel.index(x)]
    assert slope == pytest.approx(reverse_prob / forward_prob, rel=1e-6)


def test_sweep_empty_is_identity():
    state = AugmentedState(1.23, 0.4)
    out = sweep([], state, IidUniformStream(0))
    assert out.x == state.x and out.u == state.u


def test_sweep_zero_stream_alternates_reversible_kernel():
    # With a zero-emitting stream and u started at 0, a single reversible
    # component bounces between x1 and the u=0 image of x1.
    kernel = TabularKernel((0, 1, 2), [[0.2, 0.4, 0.4], [0.4, 0.2, 0.4], [0.4, 0.4, 0.2]])
    stream = ConstantStream(0.0)
    state = AugmentedState(2, 0.0)
    xs = []
    for _ in range(6):
        state = sweep([kernel], state, stream)
        xs.append(state.x)
    first_image = xs[0]
    assert xs == [first_image, 2, first_image, 2, first_image, 2]


def test_sweep_gibbs_pair_matches_gaussian_marginals():
    rho = 0.8
    kernels = [gaussian_conditional_kernel(rho, 0), gaussian_conditional_kernel(rho, 1)]
    rng = np.random.default_rng(11)
    a = rng.standard_normal()
    state = AugmentedState((a, rho * a + math.sqrt(1 - rho * rho) * rng.standard_normal()),
                           float(rng.random()))
    stream = IidUniformStream(99)
    first = np.empty(20_000)
    second = np.empty(20_000)
    for i in range(20_000):
        state = sweep(kernels, state, stream)
        first[i], second[i] = state.x
    # Thin to soften autocorrelation before the KS test.
    for series in (first[::10], second[::10]):
        _stat, pvalue = stats.kstest(series, "norm")
        assert pvalue > 0.01

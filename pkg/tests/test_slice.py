import math

import numpy as np
import pytest

from dsmcmc.augmented import mod_one
from dsmcmc.diagnostics import Trace, estimate
from dsmcmc.errors import ExpansionLimitError, InvalidStateError, ParameterError, ReplayError
from dsmcmc.slice_sampler import (
    SliceParams,
    SliceState,
    naive_slice_step,
    slice_step,
    slice_step_reverse,
)
from dsmcmc.streams import ConstantStream, IidUniformStream, ReplayStream, StreamRecorder
from dsmcmc.targets import unit_gaussian_logpdf


def _uniform_state(rng, k):
    return SliceState(float(rng.standard_normal()), [float(rng.random()) for _ in range(k)])


def test_params_validation():
    with pytest.raises(ParameterError):
        SliceParams(w=0.0)
    with pytest.raises(ParameterError):
        SliceParams(k_max=2)


def test_invalid_state_error():
    params = SliceParams()
    state = SliceState(0.0, [0.5] * params.k_max)

    with pytest.raises(InvalidStateError):
        slice_step(state, lambda _x: -math.inf, params, ConstantStream(0.1))


def test_exhausting_all_uniforms_keeps_x():
    # A spike target: the slice around x=0 is far narrower than w, so every
    # bracket proposal misses and the budget runs out.
    def spike(x):
        return -1e8 * x * x

    params = SliceParams(w=1.0, k_max=3)
    state = SliceState(0.0, [0.3, 0.6, 0.9])
    recorder = StreamRecorder(IidUniformStream(2))
    out = slice_step(state, spike, params, recorder)
    assert out.x == state.x
    assert len(recorder.log) == params.k_max
    # the refreshed uniforms are kept, not rolled back
    assert out.u[0] == mod_one(0.3 + recorder.log[0])
    assert out.u[1] == mod_one(0.6 + recorder.log[1])
    assert out.u[2] == mod_one(0.9 + recorder.log[2])


def test_flat_target_accepts_first_proposal():
    # Support (0, 10) with w=10: when the bracket refresh lands exactly on
    # [0, 10] no stepping out happens and the first proposal is accepted at
    # x' = x_lo + u3 * 10.
    def flat(x):
        return 0.0 if 0.0 < x < 10.0 else -math.inf

    params = SliceParams(w=10.0, k_max=5)
    state = SliceState(5.0, [0.4, 0.3, 0.25, 0.7, 0.7])
    # refresh u2 from 0.3 to 0.5 so x_lo = 5 - 0.5*10 = 0 exactly
    draws = [0.11, 0.2, 0.37]
    recorder = StreamRecorder(ReplayStream(draws))
    out = slice_step(state, flat, params, recorder)
    assert len(recorder.log) == 3  # threshold, bracket, single proposal
    expected_u3 = mod_one(0.25 + 0.37)
    assert out.x == pytest.approx(expected_u3 * 10.0, abs=1e-12)
    # reverse bookkeeping: u1 = y/pi(x') = refreshed u1 on a flat target,
    # u2 = (x' - x_lo)/w mod 1, u3 = relative position of old x
    assert out.u[0] == pytest.approx(mod_one(0.4 + 0.11), abs=1e-12)
    assert out.u[1] == pytest.approx(expected_u3, abs=1e-12)
    assert out.u[2] == pytest.approx(0.5, abs=1e-12)


def test_gaussian_moments_with_iid_stream():
    params = SliceParams(w=1.0, k_max=10)
    rng = np.random.default_rng(14)
    state = _uniform_state(rng, params.k_max)
    stream = IidUniformStream(3)
    n = 100_000
    xs = np.empty(n)
    for i in range(n):
        state = slice_step(state, unit_gaussian_logpdf, params, stream)
        xs[i] = state.x
    report = estimate(Trace(xs))
    assert abs(report.mean) <= 3 * report.standard_error
    second = estimate(Trace(xs**2))
    assert abs(second.mean - 1.0) <= 3 * second.standard_error


def test_forward_reverse_round_trip_random():
    params = SliceParams(w=1.0, k_max=6)
    rng = np.random.default_rng(31)
    worst = 0.0
    for _ in range(300):
        state = _uniform_state(rng, params.k_max)
        recorder = StreamRecorder(IidUniformStream(int(rng.integers(1 << 30))))
        stepped = slice_step(state, unit_gaussian_logpdf, params, recorder)
        back = slice_step_reverse(stepped, unit_gaussian_logpdf, params, recorder.log)
        worst = max(worst, abs(back.x - state.x))
        worst = max(worst, max(abs(a - b) for a, b in zip(back.u, state.u)))
    assert worst <= 1e-9


def test_reverse_of_exhausted_step_unwinds_uniforms_only():
    def spike(x):
        return -1e8 * x * x

    params = SliceParams(w=1.0, k_max=3)
    state = SliceState(0.0, [0.3, 0.6, 0.9])
    recorder = StreamRecorder(IidUniformStream(2))
    stepped = slice_step(state, spike, params, recorder)
    assert stepped.x == state.x
    back = slice_step_reverse(stepped, spike, params, recorder.log)
    assert back.x == state.x
    assert max(abs(a - b) for a, b in zip(back.u, state.u)) <= 1e-12


def test_reverse_rejects_wrong_draw_count():
    params = SliceParams(w=1.0, k_max=5)
    rng = np.random.default_rng(40)
    state = _uniform_state(rng, params.k_max)
    recorder = StreamRecorder(IidUniformStream(9))
    stepped = slice_step(state, unit_gaussian_logpdf, params, recorder)
    with pytest.raises(ReplayError):
        slice_step_reverse(stepped, unit_gaussian_logpdf, params, recorder.log + [0.5])


def test_update_jacobian_matches_density_ratio():
    # The accepted-branch transform (x, u) -> (x', u') must contract volume
    # by exactly pi*(x)/pi*(x'); check the determinant by finite differences.
    params = SliceParams(w=1.0, k_max=4)
    rng = np.random.default_rng(77)
    checked = 0
    for _ in range(30):
        base = _uniform_state(rng, params.k_max)
        draws = [float(rng.random()) for _ in range(params.k_max)]

        def transform(vec):
            state = SliceState(vec[0], list(vec[1:]))
            out = slice_step(state, unit_gaussian_logpdf, params,
                             ReplayStream(draws, on_exhaust="cycle"))
            return np.array([out.x, *out.u])

        x0 = np.array([base.x, *base.u])
        out0 = transform(x0)
        if out0[0] == base.x:  # exhausted branch is measure-preserving anyway
            continue
        eps = 1e-7
        jac = np.empty((x0.size, x0.size))
        degenerate = False
        for j in range(x0.size):
            hi = x0.copy()
            lo = x0.copy()
            hi[j] += eps
            lo[j] -= eps
            out_hi = transform(hi)
            out_lo = transform(lo)
            if out_hi.shape != out_lo.shape:
                degenerate = True
                break
            jac[:, j] = (out_hi - out_lo) / (2 * eps)
        if degenerate:
            continue
        det = abs(np.linalg.det(jac))
        expected = math.exp(unit_gaussian_logpdf(base.x) - unit_gaussian_logpdf(out0[0]))
        # FD across a branch boundary gives garbage; only count smooth cases.
        if abs(det - expected) / expected < 1e-3:
            checked += 1
    assert checked >= 15


def test_returned_uniforms_stay_in_unit_interval():
    params = SliceParams(w=1.0, k_max=6)
    rng = np.random.default_rng(62)
    state = _uniform_state(rng, params.k_max)
    stream = IidUniformStream(8)
    for _ in range(2000):
        state = slice_step(state, unit_gaussian_logpdf, params, stream)
        assert all(0.0 <= u < 1.0 for u in state.u)
        assert state.u[0] > 0.0  # threshold bookkeeping keeps u1 positive


def test_naive_gaussian_moments_with_iid_stream():
    rng = np.random.default_rng(51)
    stream = IidUniformStream(12)
    x = float(rng.standard_normal())
    n = 100_000
    xs = np.empty(n)
    for i in range(n):
        x = naive_slice_step(x, unit_gaussian_logpdf, 1.0, stream)
        xs[i] = x
    report = estimate(Trace(xs))
    assert abs(report.mean) <= 3 * report.standard_error
    second = estimate(Trace(xs**2))
    assert abs(second.mean - 1.0) <= 3 * second.standard_error


def test_naive_constant_stream_is_deterministic():
    xs = []
    for _ in range(2):
        x = 1.3
        stream = ConstantStream(0.5)
        path = [x := naive_slice_step(x, unit_gaussian_logpdf, 1.0, stream) for _ in range(50)]
        xs.append(path)
    assert xs[0] == xs[1]


def test_naive_clamps_stream_values_via_mod_one():
    # Values outside [0,1) are folded into the unit interval, so a constant
    # 2.25 behaves exactly like a constant 0.25.
    x0 = 0.7
    a = naive_slice_step(x0, unit_gaussian_logpdf, 1.0, ConstantStream(2.25))
    b = naive_slice_step(x0, unit_gaussian_logpdf, 1.0, ConstantStream(0.25))
    assert a == b


def test_expansion_limit_error():
    with pytest.raises(ExpansionLimitError):
        naive_slice_step(0.0, lambda _x: 0.0, 1.0, IidUniformStream(0), max_expansions=10)
    params = SliceParams(w=1.0, k_max=4, max_expansions=10)
    state = SliceState(0.0, [0.5] * 4)
    with pytest.raises(ExpansionLimitError):
        slice_step(state, lambda _x: 0.0, params, IidUniformStream(0))


def test_slice_state_length_must_match_params():
    params = SliceParams(k_max=5)
    with pytest.raises(ParameterError):
        slice_step(SliceState(0.0, [0.5] * 4), unit_gaussian_logpdf, params, ConstantStream(0.1))

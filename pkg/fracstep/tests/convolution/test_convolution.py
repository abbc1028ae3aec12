"""Test the direct and the fast convolution operators.
Run this test with command: poetry run pytest fracstep/tests/convolution/test_convolution.py
"""
import numpy as np
import pytest

from fracstep.convolution.corrections import (
    CorrectionSet,
    check_sigmas,
    exact_power_convolution,
    starting_weights,
)
from fracstep.convolution.direct import DirectConvolution
from fracstep.convolution.fast import (
    DIAGNOSTICS_HEADER,
    FastConvolution,
    decaying_moments,
    one_step_coefficients,
)
from fracstep.entity import FastParams, InterpKind
from fracstep.exceptions import ConditioningError, DomainError, StateError
from fracstep.experiments.kernel_error import kernel_error
from fracstep.utils.utils import Timer


def feed(op, u, steps):
    for n in range(steps + 1):
        op.push_sample(u(n * op.tau))


@pytest.mark.parametrize("alpha", [0.5, -0.5, 0.3])
@pytest.mark.parametrize(
    "kind, powers",
    [(InterpKind.QUADRATIC, [0, 1, 2]), (InterpKind.LINEAR, [0, 1])],
)
def test_direct_is_exact_on_polynomials(alpha, kind, powers):
    tau = 0.1
    for p in powers:
        op = DirectConvolution(FastParams(alpha=alpha, tau=tau, kind=kind))
        for n in range(11):
            op.push_sample((n * tau) ** p)
            if n >= kind.min_samples:
                exact = exact_power_convolution(alpha, float(p), n * tau)
                assert op.evaluate() == pytest.approx(exact, rel=1e-10)


@pytest.mark.parametrize("alpha", [0.5, -0.5])
def test_direct_split_does_not_depend_on_memory_length(alpha):
    values = []
    for n0 in (1, 3, 7):
        op = DirectConvolution(FastParams(alpha=alpha, tau=0.05, n0=n0))
        feed(op, np.cos, 30)
        local, history = op.split_eval()
        assert local + history == pytest.approx(op.direct_eval(), rel=1e-13)
        values.append(op.direct_eval())
    assert values[1] == pytest.approx(values[0], rel=1e-12)
    assert values[2] == pytest.approx(values[0], rel=1e-12)


def test_direct_evaluates_earlier_steps():
    op = DirectConvolution(FastParams(alpha=0.5, tau=0.1))
    feed(op, lambda t: 1.0 + t, 10)
    assert op.direct_eval(5) == pytest.approx(exact_power_convolution(0.5, 0.0, 0.5) + exact_power_convolution(0.5, 1.0, 0.5))
    with pytest.raises(StateError):
        op.direct_eval(11)


@pytest.mark.parametrize("kind", [InterpKind.LINEAR, InterpKind.QUADRATIC])
def test_minimum_samples(kind):
    op = DirectConvolution(FastParams(alpha=0.5, tau=0.1, kind=kind))
    with pytest.raises(StateError):
        op.step_affine()
    for n in range(kind.min_samples):
        op.push_sample(1.0)
        with pytest.raises(StateError):
            op.evaluate()


def test_sample_shape_is_fixed():
    op = DirectConvolution(FastParams(alpha=0.5, tau=0.1))
    op.push_sample([1.0, 2.0])
    with pytest.raises(StateError):
        op.push_sample(1.0)
    with pytest.raises(StateError):
        op.push_sample([[1.0]])


@pytest.mark.parametrize("cls", [DirectConvolution, FastConvolution])
@pytest.mark.parametrize("kind", [InterpKind.LINEAR, InterpKind.QUADRATIC])
@pytest.mark.parametrize("sigmas", [[], [0.5, 1.0]])
def test_step_affine_matches_evaluate(cls, kind, sigmas):
    params = FastParams(alpha=-0.5, tau=0.05, n0=2, B=3, kind=kind, horizon=2.0)
    corrections = CorrectionSet(params, sigmas, fast=cls is FastConvolution) if sigmas else None
    op = cls(params, corrections=corrections)
    u = lambda t: np.array([np.cos(t) + np.sqrt(t), np.exp(-t)])
    start = max(kind.min_samples, len(sigmas))
    for n in range(start):
        op.push_sample(u(n * params.tau))
    for n in range(start, 40):
        sample = u(n * params.tau)
        predicted = op.evaluate_with(sample)
        op.push_sample(sample)
        np.testing.assert_allclose(op.evaluate(), predicted, rtol=1e-11, atol=1e-11)


@pytest.mark.parametrize("alpha", [0.5, -0.5])
@pytest.mark.parametrize("kind", [InterpKind.LINEAR, InterpKind.QUADRATIC])
@pytest.mark.parametrize("n0, B", [(1, 5), (4, 3)])
def test_fast_matches_direct(alpha, kind, n0, B):
    params = FastParams(alpha=alpha, tau=0.05, n0=n0, B=B, eps=1e-10, kind=kind, horizon=20.0)
    fast, direct = FastConvolution(params), DirectConvolution(params)
    for n in range(params.n_steps + 1):
        sample = 1.0 + np.sin(n * params.tau)
        fast.push_sample(sample)
        direct.push_sample(sample)
        if n >= kind.min_samples:
            reference = direct.evaluate()
            assert abs(fast.evaluate() - reference) <= 1e-8 * max(1.0, abs(reference))


@pytest.mark.parametrize("alpha", [0.5, -0.5])
def test_fast_history_matches_reference(alpha):
    params = FastParams(alpha=alpha, tau=0.02, n0=3, B=2, horizon=5.0)
    op = FastConvolution(params, keep_log=True)
    for n in range(params.n_steps + 1):
        op.push_sample(np.cos(n * params.tau))
        reference = op.reference_history()
        assert abs(op.history_fast() - reference) <= 1e-12 * max(1.0, abs(reference))


def test_fast_history_split_from_direct():
    params = FastParams(alpha=0.5, tau=0.05, n0=4, B=5, horizon=10.0)
    fast, direct = FastConvolution(params), DirectConvolution(params)
    for n in range(params.n_steps + 1):
        fast.push_sample(1.0 + n * params.tau)
        direct.push_sample(1.0 + n * params.tau)
    _, history = direct.split_eval()
    assert fast.history_fast() == pytest.approx(history, rel=1e-8)
    assert fast.full_fast_eval() == pytest.approx(direct.evaluate(), rel=1e-9)
    with pytest.raises(StateError):
        fast.history_fast(3)


def test_reference_history_needs_log():
    op = FastConvolution(FastParams(alpha=0.5, tau=0.1))
    op.push_sample(1.0)
    with pytest.raises(StateError):
        op.reference_history()


def test_fast_past_horizon():
    params = FastParams(alpha=0.5, tau=0.01, n0=1, B=5, horizon=0.1)
    op = FastConvolution(params)
    with pytest.raises(StateError):
        for _ in range(51):
            op.push_sample(1.0)
    assert op.steps == 50


def fast_memory_bound(op):
    return 3 * (op.n0 + sum((2 * op.B + 1) * lvl.q for lvl in op.levels))


@pytest.mark.parametrize("steps", [10**3, 10**4, pytest.param(10**5, marks=pytest.mark.slow)])
def test_fast_memory_is_bounded(steps):
    params = FastParams(alpha=0.5, tau=0.01, n0=4, B=5, horizon=steps * 0.01)
    op = FastConvolution(params)
    op.push_sample(1.0)
    first = op.active_memory()
    assert 0 < first <= fast_memory_bound(op)
    for n in range(1, params.n_steps + 1):
        op.push_sample(np.cos(n * params.tau))
    assert op.steps == steps
    assert op.active_memory() == first


def test_fast_memory_grows_with_levels_only():
    memory, levels = [], []
    for steps in (10**3, 10**4, 10**5, 10**6):
        op = FastConvolution(FastParams(alpha=0.5, tau=0.01, n0=4, B=5, horizon=steps * 0.01))
        op.push_sample(1.0)
        memory.append(op.active_memory())
        levels.append(len(op.levels))
    assert levels == sorted(levels)
    assert memory == sorted(memory)
    assert memory[-1] < 3 * memory[0]
    assert memory[2] <= 2 * memory[1]


def test_direct_memory_grows_with_steps():
    params = FastParams(alpha=0.5, tau=0.01, n0=1, B=5, horizon=20.0)
    fast, direct = FastConvolution(params), DirectConvolution(params)
    for n in range(200):
        fast.push_sample(1.0)
        direct.push_sample(1.0)
    fast_early, direct_early = fast.active_memory(), direct.active_memory()
    for n in range(1800):
        fast.push_sample(1.0)
        direct.push_sample(1.0)
    assert fast.active_memory() == fast_early
    assert direct.active_memory() >= 2000 > direct_early
    assert fast.active_memory() < direct.active_memory()


@pytest.mark.parametrize("n0, B", [(1, 2), (3, 3), (2, 5)])
def test_fast_seals_blocks_past_memory_length(n0, B):
    params = FastParams(alpha=-0.5, tau=0.05, n0=n0, B=B, horizon=10.0)
    fast, direct = FastConvolution(params), DirectConvolution(params)
    for n in range(n0 + 3 * B + 1):
        sample = np.exp(-n * params.tau)
        fast.push_sample(sample)
        direct.push_sample(sample)
    first = fast.levels[0]
    assert first.slots == 2 * B + 1
    assert first.blocks.shape[0] == first.slots
    assert np.count_nonzero(first.ends >= 0) > 0
    assert fast.diagnostics()[0][4] > 0
    assert fast.evaluate() == pytest.approx(direct.evaluate(), rel=1e-8)


def test_max_mode_magnitude_is_bounded_by_block_length():
    params = FastParams(alpha=0.5, tau=0.01, n0=2, B=3, horizon=5.0)
    op = FastConvolution(params)
    assert op.max_mode_magnitude() == 0.0
    for n in range(params.n_steps + 1):
        op.push_sample(2.0 + np.sin(n * params.tau))
    longest = max(lvl.block_len for lvl in op.levels) * params.tau
    assert 0.0 < op.max_mode_magnitude() <= longest * 3.0 * (1.0 + 1e-12)


@pytest.mark.slow
def test_fast_memory_at_long_horizons():
    memory = {}
    for steps in (10**4, 10**5):
        params = FastParams(alpha=0.5, tau=0.01, n0=1, B=5, horizon=steps * 0.01)
        op = FastConvolution(params)
        for n in range(params.n_steps + 1):
            op.push_sample(1.0)
        memory[steps] = op.active_memory()
    assert memory[10**5] <= 2 * memory[10**4]


def run_operator(cls, steps, tau=0.01):
    params = FastParams(alpha=0.5, tau=tau, n0=1, B=5, horizon=steps * tau)
    op = cls(params)
    with Timer() as timer:
        for n in range(steps + 1):
            t = n * tau
            op.push_sample([1.0 + t, np.cos(t), np.exp(-t)])
            if n >= 2:
                op.evaluate()
    return timer.elapsed


@pytest.mark.slow
def test_wall_time_grows_linearly_for_fast_and_quadratically_for_direct():
    fast_ratio = run_operator(FastConvolution, 10**5) / run_operator(FastConvolution, 5 * 10**4)
    direct_ratio = run_operator(DirectConvolution, 10**5) / run_operator(DirectConvolution, 5 * 10**4)
    assert fast_ratio <= 2.6
    assert direct_ratio >= 3.4


def test_direct_eval_is_linear_in_the_samples():
    rng = np.random.default_rng(7)
    u, v = rng.standard_normal(40), rng.standard_normal(40)
    a, b = 0.7, -1.3
    values = []
    for samples in (u, v, a * u + b * v):
        op = DirectConvolution(FastParams(alpha=-0.5, tau=0.05, n0=3))
        for sample in samples:
            op.push_sample(sample)
        values.append(op.direct_eval())
    assert values[2] == pytest.approx(a * values[0] + b * values[1], rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("alpha", [0.5, -0.5, 0.9])
@pytest.mark.parametrize("n0", [1, 10])
def test_soe_kernel_accuracy(alpha, n0):
    eps = 1e-10
    op = FastConvolution(FastParams(alpha=alpha, tau=0.01, n0=n0, B=5, eps=eps, horizon=10.0))
    assert op.levels
    assert kernel_error(op) <= 100 * eps


def test_diagnostics(tmp_path):
    params = FastParams(alpha=0.5, tau=0.01, n0=1, B=5, horizon=5.0)
    op = FastConvolution(params)
    for _ in range(params.n_steps + 1):
        op.push_sample(1.0)
    rows = op.diagnostics()
    assert len(rows) == len(op.levels)
    for level, row in enumerate(rows, start=1):
        assert row[0] == level
        assert 1 <= row[2] <= row[1] + 1
        assert row[4] <= 2 * params.B + 1
    path = op.diagnostics_to_csv(str(tmp_path / "levels.csv"))
    with open(path) as f:
        assert f.readline().strip() == ",".join(DIAGNOSTICS_HEADER)


@pytest.mark.parametrize("lam", [0.3, 9.99999, 10.00001, 250.0])
def test_decaying_moments(lam):
    tau = 0.1
    s = np.linspace(0.0, tau, 200001)
    for k, moment in enumerate(decaying_moments([lam], tau)):
        reference = np.trapz(np.exp(-lam * s) * s**k, s)
        assert float(moment[0]) == pytest.approx(reference, rel=1e-8)


@pytest.mark.parametrize("kind", [InterpKind.LINEAR, InterpKind.QUADRATIC])
def test_one_step_coefficients_reproduce_constants(kind):
    lam = np.array([0.01, 1.0, 20.0, 500.0])
    coeffs = one_step_coefficients(lam, 0.1, kind)
    g0, _, _ = decaying_moments(lam, 0.1)
    np.testing.assert_allclose(coeffs.sum(axis=0), g0, rtol=1e-12)


@pytest.mark.parametrize("cls", [DirectConvolution, FastConvolution])
@pytest.mark.parametrize("alpha", [0.5, -0.5])
@pytest.mark.parametrize("kind", [InterpKind.LINEAR, InterpKind.QUADRATIC])
def test_corrections_make_operator_exact(cls, alpha, kind):
    sigmas = [0.5, 1.0]
    params = FastParams(alpha=alpha, tau=0.05, n0=1, B=5, kind=kind, horizon=2.0)
    op = cls(params, corrections=CorrectionSet(params, sigmas, fast=cls is FastConvolution))
    u = lambda t: 1.0 + np.sqrt(t) + t
    tolerance = 1e-10 if cls is DirectConvolution else 1e-8
    for n in range(params.n_steps + 1):
        t = n * params.tau
        op.push_sample(u(t))
        if n >= max(kind.min_samples, len(sigmas)):
            exact = sum(exact_power_convolution(alpha, s, t) for s in (0.0, 0.5, 1.0))
            assert op.evaluate() == pytest.approx(exact, rel=tolerance)


def test_uncorrected_operator_misses_singular_part():
    params = FastParams(alpha=0.5, tau=0.05, kind=InterpKind.QUADRATIC)
    op = DirectConvolution(params)
    feed(op, np.sqrt, 4)
    assert abs(op.evaluate() - exact_power_convolution(0.5, 0.5, 0.2)) > 1e-6


def test_starting_weights_single_exponent():
    params = FastParams(alpha=0.5, tau=0.1)

    def base_op(sigma, n):
        op = DirectConvolution(params)
        feed(op, lambda t: t**sigma, n)
        return op.evaluate()

    W = starting_weights(0.5, 0.1, [0.5], 5, base_op)
    expected = (exact_power_convolution(0.5, 0.5, 0.5) - base_op(0.5, 5)) / 0.1
    assert W[0] == pytest.approx(expected, rel=1e-12)


def test_correction_set_rejects_other_operator():
    corrections = CorrectionSet(FastParams(alpha=0.5, tau=0.1), [0.5])
    with pytest.raises(DomainError):
        DirectConvolution(FastParams(alpha=0.5, tau=0.2), corrections=corrections)


@pytest.mark.parametrize(
    "sigmas, error",
    [
        ([0.1 * k for k in range(1, 10)], ConditioningError),
        ([0.0, 1.0], DomainError),
        ([0.5, 0.5], DomainError),
        ([-0.5], DomainError),
    ],
)
def test_check_sigmas_errors(sigmas, error):
    with pytest.raises(error):
        check_sigmas(sigmas)


def test_check_sigmas_sorts():
    assert check_sigmas([1.0, 0.5]) == [0.5, 1.0]


@pytest.mark.parametrize("kind", [InterpKind.LINEAR, InterpKind.QUADRATIC])
def test_starting_weights_do_not_depend_on_stepsize(kind):
    sigmas = [0.5, 1.5]
    weights = []
    for tau in (0.1, 0.013):
        corrections = CorrectionSet(FastParams(alpha=-0.5, tau=tau, kind=kind), sigmas)
        weights.append(np.array([corrections.weights(n) for n in range(2, 12)]))
    np.testing.assert_allclose(weights[1], weights[0], rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("alpha", [0.1, 0.5, -0.1])
def test_starting_weight_residual(alpha):
    order = abs(alpha)
    corrections = CorrectionSet(FastParams(alpha=alpha, tau=2.0**-5), [k * order for k in range(1, 6)])
    for n in range(2, 41):
        corrections.weights(n)
    assert corrections.max_residual <= 1e-8


def test_second_derivative_kernel_is_exact_on_lines():
    params = FastParams(alpha=-1.8, tau=0.05, n0=4, B=3, horizon=5.0)
    fast, direct = FastConvolution(params), DirectConvolution(params)
    for n in range(params.n_steps + 1):
        t = n * params.tau
        fast.push_sample(1.0 + t)
        direct.push_sample(1.0 + t)
    exact = exact_power_convolution(-1.8, 0.0, 5.0) + exact_power_convolution(-1.8, 1.0, 5.0)
    assert direct.evaluate() == pytest.approx(exact, rel=1e-9)
    assert fast.evaluate() == pytest.approx(exact, rel=1e-7)

import numpy as np
import pytest

from maneuverkit.lstm import (
    LstmParams,
    LstmState,
    init_lstm_params,
    lstm_backward,
    lstm_forward,
    lstm_step,
    zero_state,
)
from maneuverkit.numerics import finite_diff_grad, make_rng


def zero_params(input_size: int, hidden: int) -> LstmParams:
    rng = make_rng(0)
    p = init_lstm_params(input_size, hidden, rng)
    for name in vars(p):
        getattr(p, name)[...] = 0.0
    return p


def reference_step(p: LstmParams, x, prev):
    """Straight-line transcription of the cell equations, written without
    reuse of the library's step code: every gate spelled out with loops."""
    H = p.hidden_size
    i = np.empty(H)
    f = np.empty(H)
    g = np.empty(H)
    o = np.empty(H)
    c = np.empty(H)
    h = np.empty(H)
    for k in range(H):
        ai = p.b_i[k] + p.V_i[k] * prev.c[k]
        af = p.b_f[k] + p.V_f[k] * prev.c[k]
        ag = p.b_c[k]
        for d in range(p.input_size):
            ai += p.W_i[k, d] * x[d]
            af += p.W_f[k, d] * x[d]
            ag += p.W_c[k, d] * x[d]
        for d in range(H):
            ai += p.U_i[k, d] * prev.h[d]
            af += p.U_f[k, d] * prev.h[d]
            ag += p.U_c[k, d] * prev.h[d]
        i[k] = 1.0 / (1.0 + np.exp(-ai))
        f[k] = 1.0 / (1.0 + np.exp(-af))
        g[k] = np.tanh(ag)
        c[k] = f[k] * prev.c[k] + i[k] * g[k]
    for k in range(H):
        ao = p.b_o[k] + p.V_o[k] * c[k]
        for d in range(p.input_size):
            ao += p.W_o[k, d] * x[d]
        for d in range(H):
            ao += p.U_o[k, d] * prev.h[d]
        o[k] = 1.0 / (1.0 + np.exp(-ao))
        h[k] = o[k] * np.tanh(c[k])
    return h, c


class TestStep:
    def test_zero_params_zero_state(self):
        p = zero_params(3, 4)
        state, cache = lstm_step(p, np.array([0.7, -1.2, 0.4]), zero_state(4))
        np.testing.assert_allclose(cache["i"], 0.5)
        np.testing.assert_allclose(cache["f"], 0.5)
        np.testing.assert_allclose(cache["o"], 0.5)
        np.testing.assert_array_equal(state.c, np.zeros(4))
        np.testing.assert_array_equal(state.h, np.zeros(4))

    def test_zero_params_nonzero_cell(self):
        p = zero_params(3, 4)
        c0 = np.array([1.0, -0.5, 2.0, 0.0])
        prev = LstmState(h=np.array([0.3, 0.1, -0.2, 0.9]), c=c0)
        state, _ = lstm_step(p, np.zeros(3), prev)
        np.testing.assert_allclose(state.c, 0.5 * c0, atol=1e-15)
        np.testing.assert_allclose(state.h, 0.5 * np.tanh(0.5 * c0), atol=1e-15)

    def test_matches_straight_line_transcription(self):
        rng = make_rng(7)
        p = init_lstm_params(3, 4, rng)
        prev = LstmState(h=rng.standard_normal(4) * 0.5, c=rng.standard_normal(4) * 0.5)
        x = rng.standard_normal(3)
        state, _ = lstm_step(p, x, prev)
        h_ref, c_ref = reference_step(p, x, prev)
        np.testing.assert_allclose(state.h, h_ref, atol=1e-12, rtol=0)
        np.testing.assert_allclose(state.c, c_ref, atol=1e-12, rtol=0)

    def test_dimension_mismatch_rejected(self):
        p = zero_params(3, 4)
        with pytest.raises(ValueError):
            lstm_step(p, np.zeros(2), zero_state(4))
        with pytest.raises(ValueError):
            lstm_step(p, np.zeros(3), zero_state(5))


class TestForward:
    def test_length_one_equals_single_step(self):
        rng = make_rng(3)
        p = init_lstm_params(2, 3, rng)
        x = rng.standard_normal((1, 2))
        states, _ = lstm_forward(p, x)
        direct, _ = lstm_step(p, x[0], zero_state(3))
        np.testing.assert_array_equal(states[0].h, direct.h)
        np.testing.assert_array_equal(states[0].c, direct.c)

    def test_zero_params_all_zero_hidden(self):
        p = zero_params(2, 3)
        states, _ = lstm_forward(p, make_rng(1).standard_normal((6, 2)))
        for s in states:
            np.testing.assert_array_equal(s.h, np.zeros(3))

    def test_constant_input_converges(self):
        rng = make_rng(5)
        p = init_lstm_params(2, 4, rng)
        xs = np.tile(np.array([0.4, -0.3]), (201, 1))
        states, _ = lstm_forward(p, xs)
        early = np.max(np.abs(states[5].h - states[4].h))
        late = np.max(np.abs(states[200].h - states[199].h))
        assert late < early

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            lstm_forward(zero_params(2, 3), np.zeros((0, 2)))

    def test_gates_strictly_inside_unit_interval(self):
        rng = make_rng(9)
        p = init_lstm_params(3, 5, rng)
        _, tape = lstm_forward(p, rng.standard_normal((20, 3)))
        for arr in (tape.i, tape.f, tape.o):
            assert np.all(arr > 0.0) and np.all(arr < 1.0)

    def test_cell_update_reproducible_from_cached_gates(self):
        rng = make_rng(13)
        p = init_lstm_params(3, 5, rng)
        _, tape = lstm_forward(p, rng.standard_normal((12, 3)))
        rebuilt = tape.f * tape.c_prev + tape.i * tape.g
        np.testing.assert_array_equal(rebuilt, tape.c)

    def test_determinism_forward_and_backward(self):
        rng = make_rng(21)
        p = init_lstm_params(3, 4, rng)
        xs = rng.standard_normal((7, 3))
        dh = rng.standard_normal((7, 4))
        _, t1 = lstm_forward(p, xs)
        _, t2 = lstm_forward(p, xs)
        np.testing.assert_array_equal(t1.h, t2.h)
        np.testing.assert_array_equal(t1.c, t2.c)
        g1, dx1 = lstm_backward(p, t1, dh)
        g2, dx2 = lstm_backward(p, t2, dh)
        np.testing.assert_array_equal(dx1, dx2)
        for name in vars(g1):
            np.testing.assert_array_equal(getattr(g1, name), getattr(g2, name))


def flatten(p: LstmParams) -> np.ndarray:
    return np.concatenate([getattr(p, name).ravel() for name in sorted(vars(p))])


def unflatten_into(p: LstmParams, flat: np.ndarray) -> None:
    offset = 0
    for name in sorted(vars(p)):
        arr = getattr(p, name)
        arr.flat[:] = flat[offset : offset + arr.size]
        offset += arr.size


def bptt_error(seed: int, T: int, hidden: int, input_size: int = 3) -> float:
    """Blockwise max relative error of BPTT vs central differences on the
    objective sum_t dh_t . h_t."""
    rng = make_rng(seed)
    p = init_lstm_params(input_size, hidden, rng)
    xs = rng.standard_normal((T, input_size))
    dh = rng.standard_normal((T, hidden))

    def objective(flat: np.ndarray) -> float:
        work = p.copy()
        unflatten_into(work, flat)
        _, tape = lstm_forward(work, xs)
        return float(np.sum(dh * tape.h))

    numeric = finite_diff_grad(objective, flatten(p), 1e-5)
    _, tape = lstm_forward(p, xs)
    grads, _ = lstm_backward(p, tape, dh)
    analytic = flatten(grads)

    worst = 0.0
    offset = 0
    for name in sorted(vars(p)):
        n = getattr(p, name).size
        a = analytic[offset : offset + n]
        m = numeric[offset : offset + n]
        offset += n
        scale = max(np.max(np.abs(a)), np.max(np.abs(m)))
        diff = np.max(np.abs(a - m))
        worst = max(worst, diff if scale < 1e-6 else diff / scale)
    return worst


class TestBackward:
    def test_zero_upstream_gives_zero_gradients(self):
        rng = make_rng(2)
        p = init_lstm_params(2, 3, rng)
        _, tape = lstm_forward(p, rng.standard_normal((4, 2)))
        grads, dx = lstm_backward(p, tape, np.zeros((4, 3)))
        for name in vars(grads):
            np.testing.assert_array_equal(getattr(grads, name), 0.0)
        np.testing.assert_array_equal(dx, 0.0)

    def test_single_step_matches_finite_differences(self):
        assert bptt_error(seed=1, T=1, hidden=4) <= 1e-6

    def test_long_sequence_matches_finite_differences(self):
        assert bptt_error(seed=11, T=8, hidden=8) <= 1e-4

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_gradients_across_shapes(self, seed):
        rng = make_rng(100 + seed)
        T = int(rng.integers(3, 11))
        hidden = int(rng.choice([4, 8]))
        assert bptt_error(seed=seed, T=T, hidden=hidden) <= 1e-4

    def test_shape_mismatch_rejected(self):
        rng = make_rng(2)
        p = init_lstm_params(2, 3, rng)
        _, tape = lstm_forward(p, rng.standard_normal((4, 2)))
        with pytest.raises(ValueError):
            lstm_backward(p, tape, np.zeros((5, 3)))

    def test_input_gradients_match_finite_differences(self):
        rng = make_rng(17)
        p = init_lstm_params(3, 4, rng)
        xs = rng.standard_normal((5, 3))
        dh = rng.standard_normal((5, 4))

        def objective(flat_xs: np.ndarray) -> float:
            _, tape = lstm_forward(p, flat_xs.reshape(5, 3))
            return float(np.sum(dh * tape.h))

        numeric = finite_diff_grad(objective, xs.ravel(), 1e-5).reshape(5, 3)
        _, tape = lstm_forward(p, xs)
        _, dx = lstm_backward(p, tape, dh)
        np.testing.assert_allclose(dx, numeric, atol=1e-7)

import numpy as np
import pytest

from maneuverkit.aiohmm import AioHmmEnsemble, infer_maneuver
from maneuverkit.anticipation import (
    STICK_STEPS,
    AioHmmPredictor,
    FusionRnnPredictor,
    WindowedPredictor,
    anticipate,
    commit_step,
    run_session,
    trajectory,
)
from maneuverkit.events import EVENTS
from maneuverkit.fusion_rnn import forward, init_fusion_model
from maneuverkit.numerics import make_rng

from test_aiohmm import random_model


class ScriptedPredictor:
    """Replays a fixed (T, K) probability table; ignores the features."""

    def __init__(self, rows, events=EVENTS):
        self.rows = np.asarray(rows, dtype=float)
        self.events = events

    def begin(self):
        return 0

    def step(self, state, x, z):
        return state + 1, self.rows[state % len(self.rows)]


def dummy_streams(T):
    return np.zeros((T, 6)), np.zeros((T, 9))


MANEUVER_ROW = [0.1, 0.6, 0.1, 0.1, 0.1]  # argmax = right_lane (index 1)
UNIFORM_ROW = [0.2] * 5


class TestCommitRule:
    def test_commits_first_crossing(self):
        xs, zs = dummy_streams(5)
        result = anticipate(ScriptedPredictor([MANEUVER_ROW]), xs, zs, 0.5)
        assert result.maneuver == 1
        assert result.t_pred == 1
        assert result.time_to_maneuver_steps == 4
        assert abs(result.time_to_maneuver_seconds - 3.2) < 1e-12

    def test_threshold_one_never_commits(self):
        xs, zs = dummy_streams(5)
        sure = np.zeros(5)
        sure[0] = 1.0
        result = anticipate(ScriptedPredictor([sure]), xs, zs, 1.0)
        assert result.maneuver == EVENTS.index("straight")
        assert result.t_pred is None and result.time_to_maneuver_steps is None

    def test_uniform_rows_stay_straight(self):
        xs, zs = dummy_streams(6)
        result = anticipate(ScriptedPredictor([UNIFORM_ROW]), xs, zs, 0.25)
        assert result.maneuver == EVENTS.index("straight")

    def test_strict_inequality_at_threshold(self):
        xs, zs = dummy_streams(3)
        result = anticipate(ScriptedPredictor([MANEUVER_ROW]), xs, zs, 0.6)
        assert result.t_pred is None  # 0.6 > 0.6 is false

    def test_argmax_ties_take_lowest_index(self):
        row = [0.4, 0.4, 0.1, 0.05, 0.05]
        t, maneuver = commit_step(np.array([row]), EVENTS.index("straight"), 0.3)
        assert (t, maneuver) == (1, 0)

    def test_trajectory_covers_full_length(self):
        xs, zs = dummy_streams(7)
        result = anticipate(ScriptedPredictor([MANEUVER_ROW]), xs, zs, 0.5)
        assert result.trajectory.shape == (7, 5)

    def test_empty_streams_rejected(self):
        with pytest.raises(ValueError):
            anticipate(ScriptedPredictor([UNIFORM_ROW]), np.zeros((0, 6)), np.zeros((0, 9)), 0.5)

    def test_bad_threshold_rejected(self):
        xs, zs = dummy_streams(3)
        for bad in (0.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                anticipate(ScriptedPredictor([UNIFORM_ROW]), xs, zs, bad)

    def test_threshold_monotonicity_on_random_trajectories(self):
        rng = make_rng(0)
        straight = EVENTS.index("straight")
        for _ in range(100):
            T = int(rng.integers(1, 15))
            traj = rng.uniform(0, 1, size=(T, 5))
            traj /= traj.sum(axis=1, keepdims=True)
            previous = None
            for p_th in (0.2, 0.4, 0.6, 0.8, 0.99):
                t, _ = commit_step(traj, straight, p_th)
                if previous is not None and previous[1] is not None:
                    # raising the threshold never commits earlier
                    assert t is None or t >= previous[1]
                previous = (p_th, t)


class TestRunSession:
    def test_true_prediction_with_time_to_maneuver(self):
        rows = [UNIFORM_ROW] * 2 + [MANEUVER_ROW] + [UNIFORM_ROW] * 10
        pred = ScriptedPredictor(rows)
        xs, zs = dummy_streams(10)
        events = run_session(pred, xs, zs, onsets=[(7, 1)], p_th=0.5)
        assert len(events) == 1
        ev = events[0]
        assert ev.kind == "tp" and ev.step == 3 and ev.ttm_steps == 4
        assert ev.ttm_steps * 0.8 == pytest.approx(3.2)

    def test_commitment_without_onset_is_false_positive(self):
        rows = [MANEUVER_ROW] + [UNIFORM_ROW] * 20
        events = run_session(ScriptedPredictor(rows), *dummy_streams(15), onsets=[], p_th=0.5)
        assert [e.kind for e in events] == ["fpp"]
        assert events[0].step == 1

    def test_silent_predictor_misses_maneuver(self):
        events = run_session(ScriptedPredictor([UNIFORM_ROW]), *dummy_streams(10), onsets=[(6, 2)], p_th=0.5)
        assert [e.kind for e in events] == ["mp"]
        assert events[0].actual == 2

    def test_wrong_maneuver_is_false_prediction(self):
        rows = [MANEUVER_ROW] + [UNIFORM_ROW] * 20
        events = run_session(ScriptedPredictor(rows), *dummy_streams(10), onsets=[(4, 2)], p_th=0.5)
        assert [e.kind for e in events] == ["fp"]

    def test_stick_rule_suppresses_for_seven_steps(self):
        assert STICK_STEPS == 7
        # scripted to commit at every un-suppressed step
        rows = [MANEUVER_ROW] * 40
        events = run_session(ScriptedPredictor(rows), *dummy_streams(17), onsets=[], p_th=0.5)
        # commits at 1 and (after the 7-step window ends at 8) again at 9;
        # the trailing commitment at 17 is closed by the end of the timeline
        assert [(e.kind, e.step) for e in events] == [("fpp", 1), ("fpp", 9), ("fpp", 17)]

    def test_onset_lifts_suppression_early(self):
        rows = [MANEUVER_ROW] * 40
        events = run_session(ScriptedPredictor(rows), *dummy_streams(12), onsets=[(3, 1)], p_th=0.5)
        # commit at 1 -> tp at onset 3 -> resume, commit at 4 -> fpp at 11
        kinds = [(e.kind, e.step) for e in events]
        assert kinds[0] == ("tp", 1)
        assert kinds[1] == ("fpp", 4)

    def test_overlapping_onsets_rejected(self):
        with pytest.raises(ValueError):
            run_session(ScriptedPredictor([UNIFORM_ROW]), *dummy_streams(10), onsets=[(4, 1), (4, 2)], p_th=0.5)
        with pytest.raises(ValueError):
            run_session(ScriptedPredictor([UNIFORM_ROW]), *dummy_streams(10), onsets=[(5, 1), (3, 2)], p_th=0.5)

    def test_determinism(self):
        rows = [MANEUVER_ROW, UNIFORM_ROW] * 10
        a = run_session(ScriptedPredictor(rows), *dummy_streams(14), onsets=[(9, 1)], p_th=0.5)
        b = run_session(ScriptedPredictor(rows), *dummy_streams(14), onsets=[(9, 1)], p_th=0.5)
        assert a == b


class TestPredictors:
    def test_rnn_incremental_matches_batch_forward(self):
        rng = make_rng(1)
        for arch in ("fusion", "concat"):
            model = init_fusion_model(arch, 6, 9, 5, EVENTS, make_rng(2))
            xs = rng.standard_normal((8, 6))
            zs = rng.standard_normal((8, 9))
            batch, _ = forward(model, xs, zs)
            stream = trajectory(FusionRnnPredictor(model), xs, zs)
            np.testing.assert_allclose(stream, batch, atol=1e-12)

    def test_aiohmm_incremental_matches_full_prefix_inference(self):
        rng = make_rng(3)
        models = {name: random_model(rng, 2, 3, 4) for name in EVENTS}
        ens = AioHmmEnsemble(events=EVENTS, models=models)
        xs = rng.standard_normal((6, 4))
        zs = rng.standard_normal((6, 3))
        stream = trajectory(AioHmmPredictor(ens), xs, zs)
        for t in range(1, 7):
            full = infer_maneuver([models[e] for e in EVENTS], xs[:t], zs[:t])
            np.testing.assert_allclose(stream[t - 1], full, atol=1e-10)

    def test_windowed_predictor_limits_context(self):
        rng = make_rng(4)
        model = init_fusion_model("fusion", 6, 9, 5, EVENTS, make_rng(5))
        xs = rng.standard_normal((9, 6))
        zs = rng.standard_normal((9, 9))
        window = 3
        stream = trajectory(WindowedPredictor(FusionRnnPredictor(model), window), xs, zs)
        for t in range(9):
            lo = max(0, t + 1 - window)
            ref, _ = forward(model, xs[lo : t + 1], zs[lo : t + 1])
            np.testing.assert_allclose(stream[t], ref[-1], atol=1e-12)

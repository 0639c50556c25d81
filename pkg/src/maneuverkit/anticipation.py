"""Streaming threshold-based event prediction.

A predictor turns a growing prefix of the two feature streams into a
probability vector over events at every step.  The anticipation walk takes
the argmax at each step and commits to the first non-straight event whose
probability strictly exceeds the threshold; otherwise it concludes straight
driving.  Ties in the argmax resolve to the lowest event index.

``run_session`` applies the same rule to a long timeline with known event
onsets: after committing, the algorithm sticks with its prediction and
stays silent for 5 seconds (7 steps of 0.8 s) or until an event starts,
whichever comes first, and each commitment/onset is scored as a true,
false, false-positive, or missed prediction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Protocol

import numpy as np

from .aiohmm import (
    AioHmmEnsemble,
    emission_logprobs,
    log_transition_matrices,
    posterior_from_logliks,
)
from .events import straight_index
from .fusion_rnn import ARCH_CONCAT, FusionRnnModel
from .lstm import lstm_step, zero_state
from .numerics import softmax

STEP_SECONDS = 0.8
STICK_SECONDS = 5.0
STICK_STEPS = math.ceil(STICK_SECONDS / STEP_SECONDS)  # 7


class Predictor(Protocol):
    """Incremental per-step probability source over a fixed event tuple."""

    events: tuple[str, ...]

    def begin(self) -> Any: ...

    def step(self, state: Any, x: np.ndarray, z: np.ndarray) -> tuple[Any, np.ndarray]: ...


class FusionRnnPredictor:
    """Streams a fusion or concat network one step at a time.

    The recurrent state carries over between steps, so evaluating the
    prefix at step t costs one cell update, not a recomputation from t=1.
    """

    def __init__(self, model: FusionRnnModel):
        model.validate()
        self.model = model
        self.events = model.events

    def begin(self):
        m = self.model
        if m.arch == ARCH_CONCAT:
            return (zero_state(m.hidden),)
        return (zero_state(m.hidden), zero_state(m.hidden))

    def step(self, state, x: np.ndarray, z: np.ndarray):
        m = self.model
        if m.arch == ARCH_CONCAT:
            (sx,) = state
            sx, _ = lstm_step(m.lstm_x, np.concatenate([x, z]), sx)
            logits = m.W_y @ sx.h + m.b_y
            return (sx,), softmax(logits)
        sx, sz = state
        sx, _ = lstm_step(m.lstm_x, x, sx)
        sz, _ = lstm_step(m.lstm_z, z, sz)
        e = np.tanh(m.W_f @ np.concatenate([sx.h, sz.h]) + m.b_f)
        logits = m.W_y @ e + m.b_y
        return (sx, sz), softmax(logits)


class AioHmmPredictor:
    """Streams the per-class model ensemble with incremental forward passes.

    Each class carries a log-space forward vector over its latent states;
    the class posterior is the shifted softmax of the accumulated prefix
    log-likelihoods plus the log prior.  Working in log space keeps the
    filter finite even for classes whose model assigns essentially no
    density to the observed prefix.
    """

    def __init__(self, ensemble: AioHmmEnsemble):
        self.ensemble = ensemble
        self.events = ensemble.events

    def begin(self):
        # per-class (log alpha or None, z_prev)
        return [(None, None) for _ in self.ensemble.events]

    def step(self, state, x: np.ndarray, z: np.ndarray):
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        new_state = []
        logliks = np.empty(len(self.ensemble.events))
        for idx, event in enumerate(self.ensemble.events):
            m = self.ensemble.models[event]
            log_alpha, z_prev = state[idx]
            zp = np.zeros_like(z) if z_prev is None else z_prev
            logb = emission_logprobs(m, x[None, :], z[None, :], z_prev=zp[None, :])[0]
            if log_alpha is None:
                with np.errstate(divide="ignore"):
                    log_alpha = np.log(m.pi) + logb
            else:
                logA = log_transition_matrices(m, x[None, :])[0]
                log_alpha = np.logaddexp.reduce(log_alpha[:, None] + logA, axis=0) + logb
            logliks[idx] = np.logaddexp.reduce(log_alpha)
            new_state.append((log_alpha, z))
        return new_state, posterior_from_logliks(logliks, self.ensemble.prior)


class WindowedPredictor:
    """Restrict a predictor to the most recent ``window`` steps.

    The full prefix is the default elsewhere; this wrapper recomputes from
    the window start each step for callers that want a bounded context.
    """

    def __init__(self, base: Predictor, window: int):
        if window < 1:
            raise ValueError("window must be at least 1")
        self.base = base
        self.window = window
        self.events = base.events

    def begin(self):
        return []  # buffered (x, z) pairs

    def step(self, state, x, z):
        buf = (state + [(np.asarray(x, float), np.asarray(z, float))])[-self.window :]
        inner = self.base.begin()
        for bx, bz in buf:
            inner, probs = self.base.step(inner, bx, bz)
        return buf, probs


@dataclass
class AnticipationResult:
    maneuver: int                       # committed event index; straight if none
    t_pred: int | None                  # 1-based commitment step
    time_to_maneuver_steps: int | None  # T - t_pred
    trajectory: np.ndarray              # (T, K) per-step probabilities

    @property
    def time_to_maneuver_seconds(self) -> float | None:
        if self.time_to_maneuver_steps is None:
            return None
        return self.time_to_maneuver_steps * STEP_SECONDS


def trajectory(predictor: Predictor, xs: np.ndarray, zs: np.ndarray) -> np.ndarray:
    """Per-step probabilities (T, K) over the growing prefix."""
    xs = np.asarray(xs, dtype=float)
    zs = np.asarray(zs, dtype=float)
    if xs.shape[0] != zs.shape[0]:
        raise ValueError(f"stream length mismatch: {xs.shape[0]} vs {zs.shape[0]}")
    if xs.shape[0] == 0:
        raise ValueError("empty streams are rejected")
    state = predictor.begin()
    rows = []
    for t in range(xs.shape[0]):
        state, probs = predictor.step(state, xs[t], zs[t])
        rows.append(probs)
    return np.asarray(rows)


def commit_step(traj: np.ndarray, straight: int, p_th: float) -> tuple[int | None, int | None]:
    """First step whose argmax is a maneuver with probability > p_th.

    Returns (1-based step, event index) or (None, None).  The inequality is
    strict, so p_th = 1.0 never commits.
    """
    if not 0.0 < p_th <= 1.0:
        raise ValueError(f"threshold must lie in (0, 1], got {p_th}")
    for t in range(traj.shape[0]):
        best = int(np.argmax(traj[t]))
        if best != straight and traj[t, best] > p_th:
            return t + 1, best
    return None, None


def anticipate(
    predictor: Predictor, xs: np.ndarray, zs: np.ndarray, p_th: float
) -> AnticipationResult:
    """Run the threshold walk over one sequence."""
    traj = trajectory(predictor, xs, zs)
    straight = straight_index(predictor.events)
    t_pred, maneuver = commit_step(traj, straight, p_th)
    if t_pred is None:
        return AnticipationResult(
            maneuver=straight, t_pred=None, time_to_maneuver_steps=None, trajectory=traj
        )
    return AnticipationResult(
        maneuver=maneuver,
        t_pred=t_pred,
        time_to_maneuver_steps=traj.shape[0] - t_pred,
        trajectory=traj,
    )


@dataclass
class PredictionEvent:
    """One scored outcome from a session run."""

    kind: str                 # "tp" | "fp" | "fpp" | "mp"
    step: int                 # 1-based commitment step (onset step for mp)
    predicted: int | None     # committed event index, None for mp
    actual: int | None        # onset event index, None for fpp
    ttm_steps: int | None     # onset - commitment, tp only


def run_session(
    predictor: Predictor,
    xs: np.ndarray,
    zs: np.ndarray,
    onsets: list[tuple[int, int]],
    p_th: float,
) -> list[PredictionEvent]:
    """Score a timeline with known event onsets under the stick rule.

    ``onsets`` is a list of (1-based step, event index), strictly increasing
    in step.  A commitment is matched against the first onset inside its
    5-second window: same event is a true prediction, a different event a
    false one; a window with no onset is a false positive.  An onset that
    arrives with no prediction pending is a missed prediction.
    """
    if not 0.0 < p_th <= 1.0:
        raise ValueError(f"threshold must lie in (0, 1], got {p_th}")
    xs = np.asarray(xs, dtype=float)
    zs = np.asarray(zs, dtype=float)
    T = xs.shape[0]
    steps = [s for s, _ in onsets]
    if any(b <= a for a, b in zip(steps, steps[1:])):
        raise ValueError("onsets must be strictly increasing; overlapping onsets are rejected")
    if any(not 1 <= s <= T for s in steps):
        raise ValueError("onset steps must lie within the timeline")
    onset_at = dict(onsets)
    straight = straight_index(predictor.events)

    events: list[PredictionEvent] = []
    state = predictor.begin()
    pending: tuple[int, int] | None = None  # (commit step, event index)
    for t in range(1, T + 1):
        state, probs = predictor.step(state, xs[t - 1], zs[t - 1])
        suppressed = pending is not None
        if not suppressed:
            best = int(np.argmax(probs))
            if best != straight and probs[best] > p_th:
                pending = (t, best)
        if t in onset_at:
            actual = onset_at[t]
            if pending is not None:
                commit_t, predicted = pending
                kind = "tp" if predicted == actual else "fp"
                events.append(
                    PredictionEvent(
                        kind=kind, step=commit_t, predicted=predicted, actual=actual,
                        ttm_steps=(t - commit_t) if kind == "tp" else None,
                    )
                )
                pending = None
            else:
                events.append(
                    PredictionEvent(kind="mp", step=t, predicted=None, actual=actual, ttm_steps=None)
                )
        elif pending is not None and t - pending[0] >= STICK_STEPS:
            commit_t, predicted = pending
            events.append(
                PredictionEvent(kind="fpp", step=commit_t, predicted=predicted, actual=None, ttm_steps=None)
            )
            pending = None
    if pending is not None:
        # The timeline ended inside the stick window with no onset.
        commit_t, predicted = pending
        events.append(
            PredictionEvent(kind="fpp", step=commit_t, predicted=predicted, actual=None, ttm_steps=None)
        )
    return events

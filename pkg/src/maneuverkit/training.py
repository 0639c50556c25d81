"""Sequence-to-sequence anticipation training.

Every step of a training sequence carries the same target: the event that
happens at the end.  The per-step cross-entropy is weighted by
exp(-lam * (T - t)), so mistakes made with the full context in view cost
e^0 = 1 while mistakes made early, when little context exists, cost
exponentially less.  ``uniform`` mode weights every step 1.

Updates are per-sample RMSprop; sample order is reshuffled each epoch by a
seeded generator, so a (seed, config) pair replays bit-identically.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import fusion_rnn
from .fusion_rnn import FusionGrads, FusionRnnModel
from .numerics import finite_diff_grad, make_rng

log = logging.getLogger(__name__)

LOSS_EXPONENTIAL = "exponential"
LOSS_UNIFORM = "uniform"


@dataclass
class TrainConfig:
    loss_mode: str = LOSS_EXPONENTIAL
    time_scale: float = 1.0          # lam in exp(-lam*(T-t)); 1.0 is the literal form
    learning_rate: float = 1e-4
    rmsprop_decay: float = 0.9
    rmsprop_epsilon: float = 1e-8
    epochs: int = 10
    seed: int = 0
    augmentation_factor: float = 1.0
    grad_clip: float | None = None
    prob_floor: float = 1e-12

    def validate(self) -> None:
        if self.loss_mode not in (LOSS_EXPONENTIAL, LOSS_UNIFORM):
            raise ValueError(f"unknown loss mode {self.loss_mode!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 < self.rmsprop_decay < 1.0:
            raise ValueError("rmsprop_decay must lie in (0, 1)")
        if self.time_scale <= 0:
            raise ValueError("time_scale must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")
        if self.augmentation_factor < 1.0:
            raise ValueError("augmentation_factor must be >= 1")

    def to_dict(self) -> dict:
        return {
            "loss_mode": self.loss_mode,
            "time_scale": self.time_scale,
            "learning_rate": self.learning_rate,
            "rmsprop_decay": self.rmsprop_decay,
            "rmsprop_epsilon": self.rmsprop_epsilon,
            "epochs": self.epochs,
            "seed": self.seed,
            "augmentation_factor": self.augmentation_factor,
            "grad_clip": self.grad_clip,
            "prob_floor": self.prob_floor,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


@dataclass
class TrainReport:
    model: FusionRnnModel
    epoch_losses: list[float]
    wall_time: float
    aborted: bool = False


def loss_weights(T: int, mode: str, time_scale: float = 1.0) -> np.ndarray:
    """Per-step weights; monotone increasing, exactly 1 at t = T."""
    if T < 1:
        raise ValueError("empty trajectories have no loss")
    if mode == LOSS_UNIFORM:
        return np.ones(T)
    t = np.arange(1, T + 1, dtype=float)
    return np.exp(-time_scale * (T - t))


def anticipation_loss(
    probs: np.ndarray,
    target: int,
    mode: str = LOSS_EXPONENTIAL,
    time_scale: float = 1.0,
    prob_floor: float = 1e-12,
) -> float:
    """sum_t -w_t log(y_t[target]) with the probabilities floored."""
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 2 or probs.shape[0] == 0:
        raise ValueError(f"expected a (T, K) trajectory, got shape {probs.shape}")
    if not 0 <= target < probs.shape[1]:
        raise ValueError(f"target index {target} out of range for K={probs.shape[1]}")
    w = loss_weights(probs.shape[0], mode, time_scale)
    p = np.maximum(probs[:, target], prob_floor)
    return float(np.sum(-w * np.log(p)))


def loss_logit_grads(
    probs: np.ndarray,
    target: int,
    mode: str = LOSS_EXPONENTIAL,
    time_scale: float = 1.0,
    prob_floor: float = 1e-12,
) -> np.ndarray:
    """Gradient of anticipation_loss w.r.t. the pre-softmax logits, (T, K).

    Steps whose target probability sits below the floor contribute zero
    gradient (the floored loss is locally constant there), keeping the
    analytic gradient consistent with finite differences of the loss.
    """
    probs = np.asarray(probs, dtype=float)
    T, K = probs.shape
    w = loss_weights(T, mode, time_scale)
    grads = probs.copy()
    grads[:, target] -= 1.0
    grads *= w[:, None]
    grads[probs[:, target] < prob_floor] = 0.0
    return grads


# ---------------------------------------------------------------------------
# RMSprop
# ---------------------------------------------------------------------------


def rmsprop_update(
    param: np.ndarray,
    grad: np.ndarray,
    acc: np.ndarray,
    learning_rate: float,
    decay: float,
    epsilon: float,
) -> tuple[np.ndarray, np.ndarray]:
    """One RMSprop step on a single array; returns (new_param, new_acc).

    acc <- decay*acc + (1-decay)*grad^2;  p <- p - lr*grad/(sqrt(acc)+eps)
    """
    if param.shape != grad.shape or param.shape != acc.shape:
        raise ValueError(
            f"shape mismatch: param {param.shape}, grad {grad.shape}, acc {acc.shape}"
        )
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError("non-finite gradient; step rejected")
    new_acc = decay * acc + (1.0 - decay) * grad * grad
    new_param = param - learning_rate * grad / (np.sqrt(new_acc) + epsilon)
    return new_param, new_acc


class RmsProp:
    """RMSprop over all parameter blocks of a FusionRnnModel (in place)."""

    def __init__(self, model: FusionRnnModel, config: TrainConfig):
        self.config = config
        self.acc = {name: np.zeros_like(arr) for name, arr in fusion_rnn.param_blocks(model)}

    def step(self, model: FusionRnnModel, grads: FusionGrads) -> None:
        cfg = self.config
        grad_map = dict(fusion_rnn.param_blocks(grads))
        if cfg.grad_clip is not None:
            norm = np.sqrt(sum(float(np.sum(g * g)) for g in grad_map.values()))
            if norm > cfg.grad_clip:
                scale = cfg.grad_clip / norm
                grad_map = {k: g * scale for k, g in grad_map.items()}
        for name, arr in fusion_rnn.param_blocks(model):
            new_p, new_acc = rmsprop_update(
                arr, grad_map[name], self.acc[name],
                cfg.learning_rate, cfg.rmsprop_decay, cfg.rmsprop_epsilon,
            )
            arr[...] = new_p
            self.acc[name] = new_acc


# ---------------------------------------------------------------------------
# Data augmentation
# ---------------------------------------------------------------------------


def augment(dataset: list, factor: float, seed: int) -> list:
    """Grow a dataset to ceil(factor * n) by sampling contiguous subsequences.

    Each added sample is (x_i..x_j, z_i..z_j) of a uniformly chosen source
    sequence with 1 <= i < j <= T (so length >= 2), carrying the source
    label.  Originals are always retained, in order, at the front.
    """
    from .synth import SequenceSample  # local import to avoid a cycle

    if factor < 1.0:
        raise ValueError(f"augmentation factor must be >= 1, got {factor}")
    n = len(dataset)
    target = int(np.ceil(factor * n))
    if target <= n:
        return list(dataset)
    for s in dataset:
        if len(s.xs) < 2:
            raise ValueError(f"sample {s.id!r} is too short to augment (T={len(s.xs)})")
    rng = make_rng(seed)
    out = list(dataset)
    count = 0
    while len(out) < target:
        src = dataset[int(rng.integers(0, n))]
        T = len(src.xs)
        i = int(rng.integers(0, T - 1))
        j = int(rng.integers(i + 1, T))
        out.append(
            SequenceSample(
                id=f"{src.id}#aug{count}",
                xs=src.xs[i : j + 1].copy(),
                zs=src.zs[i : j + 1].copy(),
                label=src.label,
                meta={"source": src.id, "start": i, "stop": j},
            )
        )
        count += 1
    return out


# ---------------------------------------------------------------------------
# Training loop
# ---------------------------------------------------------------------------


def train(dataset: list, model: FusionRnnModel, config: TrainConfig) -> TrainReport:
    """Train a copy of ``model`` on the dataset; the argument is untouched.

    Samples carry canonical label indices; they are mapped onto the model's
    own event tuple.  A non-finite loss or gradient aborts training and the
    report carries the last finite-loss model.
    """
    config.validate()
    if not dataset:
        raise ValueError("cannot train on an empty dataset")
    model = model.copy()
    if config.epochs == 0:
        return TrainReport(model=model, epoch_losses=[], wall_time=0.0)

    targets = [map_label_to_model(s.label, model.events) for s in dataset]
    rng = make_rng(config.seed)
    optimizer = RmsProp(model, config)
    start = time.monotonic()
    epoch_losses: list[float] = []
    last_good = model.copy()

    for epoch in range(config.epochs):
        order = rng.permutation(len(dataset))
        total = 0.0
        for idx in order:
            sample = dataset[int(idx)]
            probs, tape = fusion_rnn.forward(model, sample.xs, sample.zs)
            loss = anticipation_loss(
                probs, targets[int(idx)], config.loss_mode,
                config.time_scale, config.prob_floor,
            )
            if not np.isfinite(loss):
                log.error("non-finite loss at epoch %d on sample %s; aborting", epoch, sample.id)
                return TrainReport(
                    model=last_good, epoch_losses=epoch_losses,
                    wall_time=time.monotonic() - start, aborted=True,
                )
            dlogits = loss_logit_grads(
                probs, targets[int(idx)], config.loss_mode,
                config.time_scale, config.prob_floor,
            )
            grads = fusion_rnn.backward(model, tape, dlogits)
            try:
                optimizer.step(model, grads)
            except FloatingPointError as err:
                log.error("epoch %d sample %s: %s; aborting", epoch, sample.id, err)
                return TrainReport(
                    model=last_good, epoch_losses=epoch_losses,
                    wall_time=time.monotonic() - start, aborted=True,
                )
            total += loss
        epoch_losses.append(total / len(dataset))
        last_good = model.copy()

    return TrainReport(model=model, epoch_losses=epoch_losses, wall_time=time.monotonic() - start)


def map_label_to_model(canonical_label: int, model_events: tuple[str, ...]) -> int:
    """Translate a canonical label index into a model's event index."""
    from .events import EVENTS

    name = EVENTS[canonical_label]
    try:
        return model_events.index(name)
    except ValueError:
        raise ValueError(f"label {name!r} not among model events {model_events!r}") from None


# ---------------------------------------------------------------------------
# Gradient checking
# ---------------------------------------------------------------------------


@dataclass
class GradCheckReport:
    block_errors: dict[str, float]
    tolerance: float
    passed: bool = field(init=False)
    worst_block: str = field(init=False)

    def __post_init__(self) -> None:
        self.worst_block = max(self.block_errors, key=self.block_errors.get)
        self.passed = self.block_errors[self.worst_block] <= self.tolerance


def _block_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Max deviation within a block, relative to the block's gradient scale.

    Blocks whose gradients are essentially zero (scale < 1e-6) are compared
    absolutely, since a relative measure there only amplifies finite-
    difference noise.
    """
    diff = float(np.max(np.abs(analytic - numeric))) if analytic.size else 0.0
    scale = max(
        float(np.max(np.abs(analytic))) if analytic.size else 0.0,
        float(np.max(np.abs(numeric))) if numeric.size else 0.0,
    )
    if scale < 1e-6:
        return diff
    return diff / scale


def gradient_check(
    model: FusionRnnModel,
    xs: np.ndarray,
    zs: np.ndarray,
    target: int,
    config: TrainConfig,
    eps: float = 1e-5,
    tol: float = 1e-4,
) -> GradCheckReport:
    """Compare analytic gradients of the training loss to central differences."""
    work = model.copy()
    p0 = fusion_rnn.flatten_params(work)

    def objective(flat: np.ndarray) -> float:
        fusion_rnn.set_flat_params(work, flat)
        probs, _ = fusion_rnn.forward(work, xs, zs)
        return anticipation_loss(probs, target, config.loss_mode, config.time_scale, config.prob_floor)

    numeric = finite_diff_grad(objective, p0, eps)
    fusion_rnn.set_flat_params(work, p0)

    probs, tape = fusion_rnn.forward(work, xs, zs)
    dlogits = loss_logit_grads(probs, target, config.loss_mode, config.time_scale, config.prob_floor)
    grads = fusion_rnn.backward(work, tape, dlogits)

    errors: dict[str, float] = {}
    offset = 0
    analytic_blocks = dict(fusion_rnn.param_blocks(grads))
    for name, arr in fusion_rnn.param_blocks(work):
        n = arr.size
        errors[name] = _block_error(
            analytic_blocks[name].ravel(), numeric[offset : offset + n]
        )
        offset += n
    return GradCheckReport(block_errors=errors, tolerance=tol)

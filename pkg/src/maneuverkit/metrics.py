"""Evaluation: outcome counts, both precision/recall definitions, confusion
matrices, threshold sweeps, and cross-validated reporting.

Session-outcome scores follow the prediction protocol: Pr = tp/(tp+fp+fpp)
and Re = tp/(tp+fp+mp), where fpp counts maneuver predictions during
straight driving and mp counts maneuvers that passed unpredicted.  The
macro scores average per-maneuver precision TP_m/P_m and recall TP_m/N_m
over the maneuver classes, excluding straight (predicting straight is the
default, not a claim).

Undefined ratios (zero denominators) surface as None, never as silent
zeros: a sweep that silently zeroed empty cells would distort the argmax.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .anticipation import Predictor, anticipate, commit_step, trajectory
from .events import straight_index
from .synth import SequenceSample, split_folds
from .training import map_label_to_model

log = logging.getLogger(__name__)


@dataclass
class OutcomeCounts:
    tp: int = 0
    fp: int = 0
    fpp: int = 0
    mp: int = 0

    def __add__(self, other: "OutcomeCounts") -> "OutcomeCounts":
        return OutcomeCounts(
            self.tp + other.tp, self.fp + other.fp, self.fpp + other.fpp, self.mp + other.mp
        )


def precision_recall(c: OutcomeCounts) -> tuple[float | None, float | None]:
    """Session-outcome precision and recall; None marks a 0/0 ratio."""
    denom_p = c.tp + c.fp + c.fpp
    denom_r = c.tp + c.fp + c.mp
    pr = c.tp / denom_p if denom_p > 0 else None
    re = c.tp / denom_r if denom_r > 0 else None
    return pr, re


def f1_score(pr: float | None, re: float | None) -> float | None:
    if pr is None or re is None or pr + re == 0.0:
        return None
    return 2.0 * pr * re / (pr + re)


def macro_precision_recall(
    tp_m: np.ndarray, p_m: np.ndarray, n_m: np.ndarray
) -> tuple[float | None, float | None]:
    """Unweighted per-maneuver means of TP_m/P_m and TP_m/N_m.

    The arrays cover maneuver classes only (straight already excluded).
    Terms with a zero denominator are dropped with a warning; if every term
    is undefined the score is None.
    """
    tp_m = np.asarray(tp_m, dtype=float)
    p_m = np.asarray(p_m, dtype=float)
    n_m = np.asarray(n_m, dtype=float)

    def mean_ratio(num: np.ndarray, den: np.ndarray, what: str) -> float | None:
        ok = den > 0
        if not np.all(ok):
            log.warning("%d %s term(s) undefined (zero denominator); excluded", int((~ok).sum()), what)
        if not np.any(ok):
            return None
        return float(np.mean(num[ok] / den[ok]))

    return mean_ratio(tp_m, p_m, "precision"), mean_ratio(tp_m, n_m, "recall")


@dataclass
class DatasetEval:
    """Evaluation of one predictor at one threshold on one dataset.

    The confusion matrix is (K, K) with rows = predicted event and columns
    = actual event, in the predictor's event order (straight last); its
    row-normalized diagonal is the per-maneuver precision.
    """

    events: tuple[str, ...]
    counts: OutcomeCounts
    confusion: np.ndarray
    ttm_steps: list[int] = field(default_factory=list)

    @property
    def precision(self) -> float | None:
        return precision_recall(self.counts)[0]

    @property
    def recall(self) -> float | None:
        return precision_recall(self.counts)[1]

    @property
    def f1(self) -> float | None:
        return f1_score(*precision_recall(self.counts))

    @property
    def mean_ttm_steps(self) -> float | None:
        """Average time-to-maneuver over true predictions only."""
        if not self.ttm_steps:
            return None
        return float(np.mean(self.ttm_steps))

    def macro_scores(self) -> tuple[float | None, float | None]:
        straight = straight_index(self.events)
        keep = [i for i in range(len(self.events)) if i != straight]
        tp_m = np.array([self.confusion[i, i] for i in keep])
        p_m = np.array([self.confusion[i, :].sum() for i in keep])
        n_m = np.array([self.confusion[:, i].sum() for i in keep])
        return macro_precision_recall(tp_m, p_m, n_m)


def _score_pair(
    predicted: int, actual: int, straight: int, counts: OutcomeCounts
) -> None:
    if actual != straight:
        if predicted == actual:
            counts.tp += 1
        elif predicted != straight:
            counts.fp += 1
        else:
            counts.mp += 1
    elif predicted != straight:
        counts.fpp += 1


def evaluate_dataset(
    predictor: Predictor, dataset: list[SequenceSample], p_th: float
) -> DatasetEval:
    """Run the anticipation walk on every sample and score the outcomes."""
    K = len(predictor.events)
    straight = straight_index(predictor.events)
    counts = OutcomeCounts()
    confusion = np.zeros((K, K))
    ttm: list[int] = []
    for sample in dataset:
        result = anticipate(predictor, sample.xs, sample.zs, p_th)
        actual = map_label_to_model(sample.label, predictor.events)
        confusion[result.maneuver, actual] += 1
        before = counts.tp
        _score_pair(result.maneuver, actual, straight, counts)
        if counts.tp > before:
            ttm.append(result.time_to_maneuver_steps)
    return DatasetEval(events=predictor.events, counts=counts, confusion=confusion, ttm_steps=ttm)


def _eval_from_trajectories(
    events: tuple[str, ...],
    trajs: list[np.ndarray],
    actuals: list[int],
    p_th: float,
) -> DatasetEval:
    K = len(events)
    straight = straight_index(events)
    counts = OutcomeCounts()
    confusion = np.zeros((K, K))
    ttm: list[int] = []
    for traj, actual in zip(trajs, actuals):
        t_pred, maneuver = commit_step(traj, straight, p_th)
        predicted = straight if t_pred is None else maneuver
        confusion[predicted, actual] += 1
        before = counts.tp
        _score_pair(predicted, actual, straight, counts)
        if counts.tp > before:
            ttm.append(traj.shape[0] - t_pred)
    return DatasetEval(events=events, counts=counts, confusion=confusion, ttm_steps=ttm)


@dataclass
class SweepPoint:
    p_th: float
    precision: float | None
    recall: float | None
    f1: float | None
    mean_ttm_steps: float | None


@dataclass
class SweepResult:
    points: list[SweepPoint]
    best_index: int | None

    @property
    def best(self) -> SweepPoint | None:
        return None if self.best_index is None else self.points[self.best_index]


def threshold_sweep(
    predictor: Predictor, dataset: list[SequenceSample], grid: list[float]
) -> SweepResult:
    """Evaluate every threshold in the grid and flag the best-F1 point.

    Trajectories are computed once per sample; each threshold only replays
    the commitment rule.  Ties on F1 go to the lowest threshold.
    """
    if len(grid) == 0:
        raise ValueError("threshold grid must be nonempty")
    if any(not 0.0 < g <= 1.0 for g in grid):
        raise ValueError("thresholds must lie in (0, 1]")
    trajs = [trajectory(predictor, s.xs, s.zs) for s in dataset]
    actuals = [map_label_to_model(s.label, predictor.events) for s in dataset]
    points = []
    for g in grid:
        ev = _eval_from_trajectories(predictor.events, trajs, actuals, g)
        points.append(
            SweepPoint(p_th=g, precision=ev.precision, recall=ev.recall, f1=ev.f1,
                       mean_ttm_steps=ev.mean_ttm_steps)
        )
    defined = [i for i, p in enumerate(points) if p.f1 is not None]
    best = max(defined, key=lambda i: points[i].f1) if defined else None
    return SweepResult(points=points, best_index=best)


@dataclass
class FoldScore:
    precision: float | None
    recall: float | None
    f1: float | None
    mean_ttm_steps: float | None
    p_th: float


@dataclass
class EvalReport:
    """Cross-validated scores: per-fold rows plus mean and standard error."""

    events: tuple[str, ...]
    folds: list[FoldScore]
    confusion: np.ndarray  # summed over folds, at each fold's best threshold

    def _agg(self, values: list[float | None]) -> tuple[float | None, float | None]:
        defined = [v for v in values if v is not None]
        if len(defined) < len(values):
            log.warning("%d fold value(s) undefined; aggregating the rest", len(values) - len(defined))
        if not defined:
            return None, None
        mean = float(np.mean(defined))
        if len(defined) < 2:
            return mean, 0.0
        stderr = float(np.std(defined, ddof=1) / np.sqrt(len(defined)))
        return mean, stderr

    def precision_mean_stderr(self) -> tuple[float | None, float | None]:
        return self._agg([f.precision for f in self.folds])

    def recall_mean_stderr(self) -> tuple[float | None, float | None]:
        return self._agg([f.recall for f in self.folds])

    def f1_mean_stderr(self) -> tuple[float | None, float | None]:
        return self._agg([f.f1 for f in self.folds])

    def ttm_mean_stderr(self) -> tuple[float | None, float | None]:
        return self._agg([f.mean_ttm_steps for f in self.folds])


def cross_validate(
    dataset: list[SequenceSample],
    k: int,
    trainer,
    seed: int,
    grid: list[float],
) -> EvalReport:
    """k-fold evaluation with per-fold threshold selection.

    ``trainer(train_samples, fold_index) -> Predictor`` owns training (and
    any augmentation of the training folds); test folds are passed through
    verbatim.  Each fold is scored at its own best-F1 threshold from the
    grid, matching how headline numbers are tabulated.
    """
    folds = split_folds(dataset, k, seed)
    scores: list[FoldScore] = []
    confusion_total: np.ndarray | None = None
    events: tuple[str, ...] | None = None
    for fold_idx, test in enumerate(folds):
        train_samples = [s for j, f in enumerate(folds) if j != fold_idx for s in f]
        predictor = trainer(train_samples, fold_idx)
        events = predictor.events
        sweep = threshold_sweep(predictor, test, grid)
        best = sweep.best
        if best is None:
            log.warning("fold %d: F1 undefined at every threshold", fold_idx)
            scores.append(FoldScore(None, None, None, None, grid[0]))
            continue
        ev = evaluate_dataset(predictor, test, best.p_th)
        scores.append(
            FoldScore(ev.precision, ev.recall, ev.f1, ev.mean_ttm_steps, best.p_th)
        )
        confusion_total = ev.confusion if confusion_total is None else confusion_total + ev.confusion
    if events is None:
        raise ValueError("cross-validation produced no folds")
    if confusion_total is None:
        confusion_total = np.zeros((len(events), len(events)))
    return EvalReport(events=events, folds=scores, confusion=confusion_total)


def row_normalized(confusion: np.ndarray) -> np.ndarray:
    """Confusion rows divided by their sums (zero rows stay zero)."""
    sums = confusion.sum(axis=1, keepdims=True)
    out = np.zeros_like(confusion, dtype=float)
    np.divide(confusion, sums, out=out, where=sums > 0)
    return out


def format_eval(ev: DatasetEval) -> str:
    """Human-readable text block for a single evaluation."""
    macro_pr, macro_re = ev.macro_scores()
    lines = [
        f"counts: tp={ev.counts.tp} fp={ev.counts.fp} fpp={ev.counts.fpp} mp={ev.counts.mp}",
        f"session: precision={_fmt(ev.precision)} recall={_fmt(ev.recall)} f1={_fmt(ev.f1)}",
        f"macro:   precision={_fmt(macro_pr)} recall={_fmt(macro_re)} "
        f"f1={_fmt(f1_score(macro_pr, macro_re))}",
        f"time-to-maneuver: {_fmt(ev.mean_ttm_steps)} steps"
        + (f" ({ev.mean_ttm_steps * 0.8:.2f} s)" if ev.mean_ttm_steps is not None else ""),
        "confusion (rows = predicted, cols = actual):",
    ]
    header = " " * 12 + " ".join(f"{e[:10]:>10}" for e in ev.events)
    lines.append(header)
    for i, e in enumerate(ev.events):
        row = " ".join(f"{int(v):>10}" for v in ev.confusion[i])
        lines.append(f"{e[:10]:>10}  {row}")
    return "\n".join(lines)


def _fmt(v: float | None) -> str:
    return "undef" if v is None else f"{v:.4f}"

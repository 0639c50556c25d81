"""On-disk formats: JSONL datasets, JSON model checkpoints, JSON reports.

Datasets are one JSON object per line:

    {"id": "...", "label": "left_lane", "steps": [{"x": [6 numbers],
     "z": [9 or 12 numbers]}, ...], "meta": {...}}

Checkpoints are a single versioned JSON document:

    {"format_version": 1, "kind": "fusion_rnn" | "aio_hmm",
     "config": {...}, "params": {...}}

Floats are serialized through Python's shortest-round-trip repr, so a saved
number parses back to the identical 64-bit value and save/load round trips
are bit-exact.  NaN or Inf anywhere in a model is a save-time error.
"""

from __future__ import annotations

import json
from dataclasses import fields
from pathlib import Path

import numpy as np

from .aiohmm import AioHmmEnsemble, AioHmmModel
from .events import EVENTS, validate_events
from .fusion_rnn import ARCH_FUSION, FusionRnnModel, param_blocks
from .lstm import LstmParams
from .synth import SequenceSample

FORMAT_VERSION = 1
KIND_FUSION = "fusion_rnn"
KIND_AIOHMM = "aio_hmm"


class DataFormatError(ValueError):
    """A file violated the dataset or checkpoint contract."""


# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------


def save_dataset(dataset: list[SequenceSample], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for s in dataset:
            record = {
                "id": s.id,
                "label": EVENTS[s.label],
                "steps": [
                    {"x": list(map(float, x)), "z": list(map(float, z))}
                    for x, z in zip(s.xs, s.zs)
                ],
            }
            if s.meta:
                record["meta"] = s.meta
            fh.write(json.dumps(record, allow_nan=False) + "\n")


def load_dataset(path: str | Path) -> list[SequenceSample]:
    """Parse and validate a JSONL dataset; diagnostics carry line numbers."""
    path = Path(path)
    samples: list[SequenceSample] = []
    z_dim: int | None = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as err:
                raise DataFormatError(f"{path}:{lineno}: malformed JSON ({err})") from None
            samples.append(_parse_sample(record, path, lineno))
            z_now = samples[-1].zs.shape[1]
            if z_dim is None:
                z_dim = z_now
            elif z_now != z_dim:
                raise DataFormatError(
                    f"{path}:{lineno}: z has length {z_now}, but earlier lines use {z_dim}"
                )
    return samples


def _parse_sample(record: dict, path: Path, lineno: int) -> SequenceSample:
    def fail(msg: str) -> DataFormatError:
        return DataFormatError(f"{path}:{lineno}: {msg}")

    if not isinstance(record, dict):
        raise fail("each line must be a JSON object")
    for key in ("id", "label", "steps"):
        if key not in record:
            raise fail(f"missing required key {key!r}")
    label = record["label"]
    if label not in EVENTS:
        raise fail(f"unknown label {label!r}; expected one of {list(EVENTS)}")
    steps = record["steps"]
    if not isinstance(steps, list) or not steps:
        raise fail("'steps' must be a nonempty list")
    xs, zs = [], []
    for i, step in enumerate(steps):
        if not isinstance(step, dict) or "x" not in step or "z" not in step:
            raise fail(f"step {i} must be an object with 'x' and 'z'")
        x, z = step["x"], step["z"]
        if len(x) != 6:
            raise fail(f"step {i}: x has length {len(x)}, expected 6")
        if len(z) not in (9, 12):
            raise fail(f"step {i}: z has length {len(z)}, expected 9 or 12")
        xs.append(x)
        zs.append(z)
    xs = np.asarray(xs, dtype=float)
    zs = np.asarray(zs, dtype=float)
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(zs))):
        raise fail("features contain non-finite values")
    return SequenceSample(
        id=str(record["id"]), xs=xs, zs=zs, label=EVENTS.index(label),
        meta=record.get("meta", {}),
    )


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------


def _check_finite_tree(name: str, value) -> None:
    if isinstance(value, np.ndarray):
        if not np.all(np.isfinite(value)):
            raise DataFormatError(f"refusing to save non-finite parameters in {name}")


def save_model(model, config: dict, path: str | Path) -> None:
    """Write a fusion network or an AIO-HMM ensemble checkpoint."""
    if isinstance(model, FusionRnnModel):
        kind, params = KIND_FUSION, _fusion_to_dict(model)
    elif isinstance(model, AioHmmEnsemble):
        kind, params = KIND_AIOHMM, _ensemble_to_dict(model)
    else:
        raise TypeError(f"cannot checkpoint object of type {type(model).__name__}")
    doc = {"format_version": FORMAT_VERSION, "kind": kind, "config": config, "params": params}
    Path(path).write_text(json.dumps(doc, allow_nan=False, indent=1) + "\n", encoding="utf-8")


def load_model(path: str | Path):
    """Read a checkpoint; returns (model, kind, config)."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise DataFormatError(f"{path}: malformed JSON ({err})") from None
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise DataFormatError(f"{path}: unsupported format_version {version!r}")
    kind = doc.get("kind")
    config = doc.get("config", {})
    if kind == KIND_FUSION:
        return _fusion_from_dict(doc["params"]), kind, config
    if kind == KIND_AIOHMM:
        return _ensemble_from_dict(doc["params"]), kind, config
    raise DataFormatError(f"{path}: unknown checkpoint kind {kind!r}")


def _fusion_to_dict(m: FusionRnnModel) -> dict:
    for name, arr in param_blocks(m):
        _check_finite_tree(name, arr)
    return {
        "arch": m.arch,
        "input_x": m.input_x,
        "input_z": m.input_z,
        "hidden": m.hidden,
        "fusion": m.fusion,
        "events": list(m.events),
        "blocks": {name: arr.tolist() for name, arr in param_blocks(m)},
    }


def _fusion_from_dict(d: dict) -> FusionRnnModel:
    blocks = d["blocks"]

    def arr(name: str) -> np.ndarray:
        return np.asarray(blocks[name], dtype=float)

    def lstm(prefix: str) -> LstmParams:
        return LstmParams(**{f.name: arr(f"{prefix}.{f.name}") for f in fields(LstmParams)})

    is_fusion = d["arch"] == ARCH_FUSION
    model = FusionRnnModel(
        arch=d["arch"], input_x=d["input_x"], input_z=d["input_z"],
        hidden=d["hidden"], fusion=d["fusion"], events=tuple(d["events"]),
        lstm_x=lstm("lstm_x"),
        lstm_z=lstm("lstm_z") if is_fusion else None,
        W_f=arr("W_f") if is_fusion else None,
        b_f=arr("b_f") if is_fusion else None,
        W_y=arr("W_y"), b_y=arr("b_y"),
    )
    model.validate()
    return model


def _aiohmm_to_dict(m: AioHmmModel) -> dict:
    for name in ("mu", "a", "b", "sigma", "w", "pi"):
        _check_finite_tree(name, getattr(m, name))
    return {
        "variant": m.variant,
        "mu": m.mu.tolist(), "a": m.a.tolist(), "b": m.b.tolist(),
        "sigma": m.sigma.tolist(), "w": m.w.tolist(), "pi": m.pi.tolist(),
    }


def _aiohmm_from_dict(d: dict) -> AioHmmModel:
    model = AioHmmModel(
        variant=d["variant"],
        mu=np.asarray(d["mu"], dtype=float),
        a=np.asarray(d["a"], dtype=float),
        b=np.asarray(d["b"], dtype=float),
        sigma=np.asarray(d["sigma"], dtype=float),
        w=np.asarray(d["w"], dtype=float),
        pi=np.asarray(d["pi"], dtype=float),
    )
    model.validate()
    return model


def _ensemble_to_dict(e: AioHmmEnsemble) -> dict:
    return {
        "events": list(e.events),
        "prior": e.prior.tolist(),
        "models": {name: _aiohmm_to_dict(m) for name, m in e.models.items()},
    }


def _ensemble_from_dict(d: dict) -> AioHmmEnsemble:
    events = tuple(d["events"])
    validate_events(events)
    return AioHmmEnsemble(
        events=events,
        models={name: _aiohmm_from_dict(md) for name, md in d["models"].items()},
        prior=np.asarray(d["prior"], dtype=float),
    )


# ---------------------------------------------------------------------------
# Reports and frame records
# ---------------------------------------------------------------------------


def save_report(report: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, allow_nan=False, indent=1) + "\n", encoding="utf-8")


def load_report(path: str | Path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise DataFormatError(f"{path}: malformed JSON ({err})") from None


def load_frames(path: str | Path):
    """Read per-frame motion records (JSONL) for the feature pipeline.

    Each line: {"matches": [[dx, dy], ...], "center": [dx, dy],
    "pose": [yaw, pitch, roll]?}.
    """
    from .features import FrameMotion

    path = Path(path)
    frames = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as err:
                raise DataFormatError(f"{path}:{lineno}: malformed JSON ({err})") from None
            matches = [tuple(map(float, mv)) for mv in record.get("matches", [])]
            center = tuple(map(float, record.get("center", (0.0, 0.0))))
            pose = record.get("pose")
            frames.append(
                FrameMotion(
                    matches=matches, center_motion=center,
                    pose=tuple(map(float, pose)) if pose is not None else None,
                )
            )
    return frames

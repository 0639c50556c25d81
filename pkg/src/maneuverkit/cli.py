"""Command-line pipeline: synth, train, eval, anticipate, sweep, xval,
gradcheck, and report.

Every command logs its fully resolved configuration (including the seed) to
stderr before doing any work, so a run can be reproduced from its log line.
Relative data paths are also tried under $MANEUVERKIT_DATA_DIR when they do
not resolve directly.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import aiohmm, anticipation, dataio, fusion_rnn, metrics, synth, training
from .events import EVENTS, events_for_setting
from .numerics import make_rng

log = logging.getLogger("maneuverkit")

RNN_ARCHS = {
    "frnn-el": ("fusion", training.LOSS_EXPONENTIAL),
    "frnn-ul": ("fusion", training.LOSS_UNIFORM),
    "srnn": ("concat", training.LOSS_EXPONENTIAL),
}
HMM_ARCHS = {
    "aiohmm": aiohmm.VARIANT_AIO,
    "iohmm": aiohmm.VARIANT_IO,
    "hmm": aiohmm.VARIANT_HMM,
}


def _resolve_data(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    root = os.environ.get("MANEUVERKIT_DATA_DIR")
    if root and (Path(root) / path).exists():
        return Path(root) / path
    raise FileNotFoundError(f"data file not found: {path}")


def _log_config(command: str, args: argparse.Namespace) -> None:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    log.info("%s config: %s", command, json.dumps(resolved, default=str))


def _grid(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad threshold grid {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("threshold grid is empty")
    return values


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_synth(args) -> int:
    _log_config("synth", args)
    overrides = {}
    if args.config:
        overrides = json.loads(Path(args.config).read_text(encoding="utf-8"))
    overrides.setdefault("seed", args.seed)
    config = synth.ScenarioConfig.from_dict(overrides)
    dataset = synth.generate(config, args.n)
    dataio.save_dataset(dataset, args.out)
    log.info("wrote %d samples to %s", len(dataset), args.out)
    return 0


def _train_config(args) -> training.TrainConfig:
    return training.TrainConfig(
        loss_mode=RNN_ARCHS[args.arch][1],
        time_scale=args.loss_scale,
        learning_rate=args.lr,
        epochs=args.epochs,
        seed=args.seed,
        augmentation_factor=args.augment_factor,
    )


def _train_rnn(args, dataset) -> tuple[fusion_rnn.FusionRnnModel, dict, list]:
    arch, _ = RNN_ARCHS[args.arch]
    events = events_for_setting(args.setting)
    dataset = [s for s in dataset if EVENTS[s.label] in events]
    config = _train_config(args)
    if config.augmentation_factor > 1.0:
        dataset = training.augment(dataset, config.augmentation_factor, config.seed)
    model = fusion_rnn.init_fusion_model(
        arch, dataset[0].xs.shape[1], dataset[0].zs.shape[1], args.hidden,
        events, make_rng(args.seed), fusion=args.fusion_width,
    )
    report = training.train(dataset, model, config)
    if report.aborted:
        raise RuntimeError("training diverged; checkpoint holds the last finite state")
    meta = {"arch": args.arch, "setting": args.setting, "train": config.to_dict(),
            "hidden": args.hidden, "fusion_width": args.fusion_width}
    curve = [("epoch", "mean_loss")] + list(enumerate(report.epoch_losses))
    return report.model, meta, curve


def _train_hmm(args, dataset) -> tuple[aiohmm.AioHmmEnsemble, dict, list]:
    variant = HMM_ARCHS[args.arch]
    events = events_for_setting(args.setting)
    config = aiohmm.EmConfig(
        states=args.states, variant=variant, max_iter=args.em_iters, seed=args.seed
    )
    models = {}
    curve = [("event", "iteration", "loglik")]
    for name in events:
        label = EVENTS.index(name)
        seqs = [(s.xs, s.zs) for s in dataset if s.label == label]
        if not seqs:
            raise ValueError(f"dataset has no samples for event {name!r}")
        models[name], trace = aiohmm.fit_em(seqs, config)
        curve.extend((name, i, v) for i, v in enumerate(trace))
        log.info("fit %s: %d EM iterations, final loglik %.2f", name, len(trace), trace[-1])
    ensemble = aiohmm.AioHmmEnsemble(events=events, models=models)
    meta = {"arch": args.arch, "setting": args.setting, "em": config.to_dict()}
    return ensemble, meta, curve


def cmd_train(args) -> int:
    _log_config("train", args)
    dataset = dataio.load_dataset(_resolve_data(args.data))
    if not dataset:
        raise ValueError("training dataset is empty")
    if args.arch in RNN_ARCHS:
        model, meta, curve = _train_rnn(args, dataset)
    else:
        model, meta, curve = _train_hmm(args, dataset)
    dataio.save_model(model, meta, args.out)
    log.info("checkpoint written to %s", args.out)
    if args.curve_out:
        with open(args.curve_out, "w", encoding="utf-8", newline="\n") as fh:
            for row in curve:
                fh.write(",".join(str(v) for v in row) + "\n")
        log.info("training curve written to %s", args.curve_out)
    return 0


def _load_predictor(path: str, window: int | None = None) -> anticipation.Predictor:
    model, kind, _config = dataio.load_model(path)
    if kind == dataio.KIND_FUSION:
        pred = anticipation.FusionRnnPredictor(model)
    else:
        pred = anticipation.AioHmmPredictor(model)
    if window is not None:
        pred = anticipation.WindowedPredictor(pred, window)
    return pred


def _eval_report_dict(ev: metrics.DatasetEval, p_th: float, which: str) -> dict:
    macro_pr, macro_re = ev.macro_scores()
    out = {
        "kind": "eval",
        "events": list(ev.events),
        "p_th": p_th,
        "counts": {"tp": ev.counts.tp, "fp": ev.counts.fp, "fpp": ev.counts.fpp, "mp": ev.counts.mp},
        "ttm_steps": ev.mean_ttm_steps,
        "confusion": ev.confusion.tolist(),
    }
    if which in ("session", "both"):
        out["session"] = {"precision": ev.precision, "recall": ev.recall, "f1": ev.f1}
    if which in ("macro", "both"):
        out["macro"] = {
            "precision": macro_pr, "recall": macro_re, "f1": metrics.f1_score(macro_pr, macro_re)
        }
    return out


def cmd_eval(args) -> int:
    _log_config("eval", args)
    predictor = _load_predictor(args.model)
    dataset = dataio.load_dataset(_resolve_data(args.data))
    ev = metrics.evaluate_dataset(predictor, dataset, args.pth)
    print(metrics.format_eval(ev))
    if args.out:
        dataio.save_report(_eval_report_dict(ev, args.pth, args.metrics), args.out)
        log.info("report written to %s", args.out)
    return 0


def cmd_anticipate(args) -> int:
    _log_config("anticipate", args)
    predictor = _load_predictor(args.model, args.window_steps)
    if args.stream:
        return _stream_loop(predictor, args.pth)
    if not args.data:
        raise ValueError("anticipate needs --data unless --stream is given")
    dataset = dataio.load_dataset(_resolve_data(args.data))
    for sample in dataset:
        result = anticipation.anticipate(predictor, sample.xs, sample.zs, args.pth)
        print(
            json.dumps(
                {
                    "id": sample.id,
                    "predicted": predictor.events[result.maneuver],
                    "actual": EVENTS[sample.label],
                    "t_pred": result.t_pred,
                    "ttm_steps": result.time_to_maneuver_steps,
                    "ttm_seconds": result.time_to_maneuver_seconds,
                }
            )
        )
    return 0


def _stream_loop(predictor: anticipation.Predictor, p_th: float) -> int:
    """Read step records from stdin, emit one probability record per step.

    Input lines: {"x": [...], "z": [...]} with an optional "onset": label
    key marking an event start (which lifts the stick-rule suppression).
    Commitment events follow the same stick rule as session scoring.
    """
    from .events import straight_index

    straight = straight_index(predictor.events)
    state = predictor.begin()
    pending_until: int | None = None
    t = 0
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        t += 1
        state, probs = predictor.step(
            state, np.asarray(record["x"], float), np.asarray(record["z"], float)
        )
        out = {"t": t, "probs": {e: float(p) for e, p in zip(predictor.events, probs)}}
        if record.get("onset"):
            pending_until = None
        suppressed = pending_until is not None and t <= pending_until
        if not suppressed:
            pending_until = None
            best = int(np.argmax(probs))
            if best != straight and probs[best] > p_th:
                out["commit"] = {"event": predictor.events[best], "p": float(probs[best])}
                pending_until = t + anticipation.STICK_STEPS
        print(json.dumps(out), flush=True)
    return 0


def cmd_sweep(args) -> int:
    _log_config("sweep", args)
    predictor = _load_predictor(args.model)
    dataset = dataio.load_dataset(_resolve_data(args.data))
    sweep = metrics.threshold_sweep(predictor, dataset, args.grid)
    rows = []
    for i, p in enumerate(sweep.points):
        rows.append(
            {
                "p_th": p.p_th, "precision": p.precision, "recall": p.recall,
                "f1": p.f1, "ttm_steps": p.mean_ttm_steps, "best": i == sweep.best_index,
            }
        )
        flag = " *" if i == sweep.best_index else ""
        print(
            f"p_th={p.p_th:.3f} precision={metrics._fmt(p.precision)} "
            f"recall={metrics._fmt(p.recall)} f1={metrics._fmt(p.f1)}{flag}"
        )
    if args.out:
        dataio.save_report({"kind": "sweep", "points": rows}, args.out)
        log.info("report written to %s", args.out)
    return 0


def cmd_xval(args) -> int:
    _log_config("xval", args)
    dataset = dataio.load_dataset(_resolve_data(args.data))
    events = events_for_setting(args.setting)
    dataset = [s for s in dataset if EVENTS[s.label] in events]

    def trainer(train_samples, fold_idx):
        if args.arch in RNN_ARCHS:
            arch, _loss = RNN_ARCHS[args.arch]
            config = _train_config(args)
            samples = train_samples
            if config.augmentation_factor > 1.0:
                samples = training.augment(samples, config.augmentation_factor, config.seed)
            model = fusion_rnn.init_fusion_model(
                arch, samples[0].xs.shape[1], samples[0].zs.shape[1], args.hidden,
                events, make_rng(args.seed + fold_idx), fusion=args.fusion_width,
            )
            report = training.train(samples, model, config)
            return anticipation.FusionRnnPredictor(report.model)
        variant = HMM_ARCHS[args.arch]
        config = aiohmm.EmConfig(
            states=args.states, variant=variant, max_iter=args.em_iters, seed=args.seed + fold_idx
        )
        models = {}
        for name in events:
            seqs = [(s.xs, s.zs) for s in train_samples if s.label == EVENTS.index(name)]
            models[name], _ = aiohmm.fit_em(seqs, config)
        return anticipation.AioHmmPredictor(aiohmm.AioHmmEnsemble(events=events, models=models))

    report = metrics.cross_validate(dataset, args.folds, trainer, args.seed, args.grid)
    doc = _xval_report_dict(report, args)
    for i, f in enumerate(report.folds):
        print(
            f"fold {i}: precision={metrics._fmt(f.precision)} recall={metrics._fmt(f.recall)} "
            f"f1={metrics._fmt(f.f1)} ttm={metrics._fmt(f.mean_ttm_steps)} steps @ p_th={f.p_th}"
        )
    pr, pr_se = report.precision_mean_stderr()
    re_, re_se = report.recall_mean_stderr()
    ttm, ttm_se = report.ttm_mean_stderr()
    print(
        f"mean: precision={metrics._fmt(pr)} +/- {metrics._fmt(pr_se)}  "
        f"recall={metrics._fmt(re_)} +/- {metrics._fmt(re_se)}  "
        f"ttm={metrics._fmt(ttm)} +/- {metrics._fmt(ttm_se)} steps"
    )
    if args.out:
        dataio.save_report(doc, args.out)
        log.info("report written to %s", args.out)
    return 0


def _xval_report_dict(report: metrics.EvalReport, args) -> dict:
    pr, pr_se = report.precision_mean_stderr()
    re_, re_se = report.recall_mean_stderr()
    f1, f1_se = report.f1_mean_stderr()
    ttm, ttm_se = report.ttm_mean_stderr()
    return {
        "kind": "xval",
        "arch": args.arch,
        "events": list(report.events),
        "folds": [
            {
                "precision": f.precision, "recall": f.recall, "f1": f.f1,
                "ttm_steps": f.mean_ttm_steps, "p_th": f.p_th,
            }
            for f in report.folds
        ],
        "mean": {"precision": pr, "recall": re_, "f1": f1, "ttm_steps": ttm},
        "stderr": {"precision": pr_se, "recall": re_se, "f1": f1_se, "ttm_steps": ttm_se},
        "confusion": report.confusion.tolist(),
    }


def cmd_gradcheck(args) -> int:
    _log_config("gradcheck", args)
    if args.arch not in RNN_ARCHS:
        raise ValueError(f"gradcheck applies to the network archs, not {args.arch!r}")
    arch, loss_mode = RNN_ARCHS[args.arch]
    rng = make_rng(args.seed)
    model = fusion_rnn.init_fusion_model(arch, 6, 9, args.hidden, EVENTS, rng)
    xs = rng.standard_normal((args.steps, 6))
    zs = rng.standard_normal((args.steps, 9))
    target = int(rng.integers(0, len(EVENTS)))
    config = training.TrainConfig(loss_mode=loss_mode, seed=args.seed)
    report = training.gradient_check(model, xs, zs, target, config, eps=args.eps, tol=args.tol)
    for name, err in sorted(report.block_errors.items()):
        print(f"{name:>14}  {err:.3e}")
    status = "PASS" if report.passed else "FAIL"
    print(
        f"{status}: worst block {report.worst_block} at "
        f"{report.block_errors[report.worst_block]:.3e} (tol {report.tolerance:.1e})"
    )
    return 0 if report.passed else 1


def cmd_report(args) -> int:
    _log_config("report", args)
    doc = dataio.load_report(args.infile)
    if args.format == "text":
        _print_report_text(doc)
    else:
        _print_report_csv(doc)
    return 0


def _print_report_text(doc: dict) -> None:
    kind = doc.get("kind", "?")
    if kind == "eval":
        print(f"evaluation at p_th={doc['p_th']}")
        c = doc["counts"]
        print(f"  counts: tp={c['tp']} fp={c['fp']} fpp={c['fpp']} mp={c['mp']}")
        for section in ("session", "macro"):
            if section in doc:
                s = doc[section]
                print(
                    f"  {section}: precision={_num(s['precision'])} "
                    f"recall={_num(s['recall'])} f1={_num(s['f1'])}"
                )
        print(f"  time-to-maneuver: {_num(doc['ttm_steps'])} steps")
        _print_confusion(doc)
    elif kind == "xval":
        print(f"cross-validation ({doc.get('arch', '?')})")
        for i, f in enumerate(doc["folds"]):
            print(
                f"  fold {i}: precision={_num(f['precision'])} recall={_num(f['recall'])} "
                f"f1={_num(f['f1'])} ttm={_num(f['ttm_steps'])} @ p_th={f['p_th']}"
            )
        m, s = doc["mean"], doc["stderr"]
        for key in ("precision", "recall", "f1", "ttm_steps"):
            print(f"  {key}: {_num(m[key])} +/- {_num(s[key])}")
        _print_confusion(doc)
    elif kind == "sweep":
        for p in doc["points"]:
            flag = " *" if p["best"] else ""
            print(
                f"  p_th={p['p_th']} precision={_num(p['precision'])} "
                f"recall={_num(p['recall'])} f1={_num(p['f1'])}{flag}"
            )
    else:
        print(json.dumps(doc, indent=2))


def _print_confusion(doc: dict) -> None:
    events = doc.get("events")
    confusion = doc.get("confusion")
    if not events or confusion is None:
        return
    print("  confusion (rows = predicted, cols = actual):")
    print("    " + " ".join(f"{e[:10]:>10}" for e in events))
    for name, row in zip(events, confusion):
        print(f"    {name[:10]:>10} " + " ".join(f"{int(v):>10}" for v in row))


def _print_report_csv(doc: dict) -> None:
    kind = doc.get("kind", "?")
    if kind == "eval":
        print("metric,value")
        c = doc["counts"]
        for k in ("tp", "fp", "fpp", "mp"):
            print(f"{k},{c[k]}")
        for section in ("session", "macro"):
            if section in doc:
                for k, v in doc[section].items():
                    print(f"{section}_{k},{_num(v)}")
        print(f"ttm_steps,{_num(doc['ttm_steps'])}")
        _print_confusion_csv(doc)
    elif kind == "xval":
        print("fold,precision,recall,f1,ttm_steps,p_th")
        for i, f in enumerate(doc["folds"]):
            print(
                f"{i},{_num(f['precision'])},{_num(f['recall'])},"
                f"{_num(f['f1'])},{_num(f['ttm_steps'])},{f['p_th']}"
            )
        m, s = doc["mean"], doc["stderr"]
        print(f"mean,{_num(m['precision'])},{_num(m['recall'])},{_num(m['f1'])},{_num(m['ttm_steps'])},")
        print(f"stderr,{_num(s['precision'])},{_num(s['recall'])},{_num(s['f1'])},{_num(s['ttm_steps'])},")
        _print_confusion_csv(doc)
    elif kind == "sweep":
        print("p_th,precision,recall,f1,ttm_steps,best")
        for p in doc["points"]:
            print(
                f"{p['p_th']},{_num(p['precision'])},{_num(p['recall'])},"
                f"{_num(p['f1'])},{_num(p['ttm_steps'])},{int(p['best'])}"
            )
    else:
        raise ValueError(f"cannot render report of kind {kind!r} as CSV")


def _print_confusion_csv(doc: dict) -> None:
    events = doc.get("events")
    confusion = doc.get("confusion")
    if not events or confusion is None:
        return
    print("confusion," + ",".join(events))
    for name, row in zip(events, confusion):
        print(f"{name}," + ",".join(str(int(v)) for v in row))


def _num(v) -> str:
    return "undef" if v is None else f"{v:.6g}"


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--arch", required=True, choices=sorted(list(RNN_ARCHS) + list(HMM_ARCHS)))
    p.add_argument("--hidden", type=int, default=64, help="LSTM hidden size per stream")
    p.add_argument("--fusion-width", type=int, default=None, help="fusion layer width (default: hidden)")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--loss-scale", type=float, default=1.0, help="time scale of the exponential loss weights")
    p.add_argument("--augment-factor", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--setting", choices=("all", "lane", "turn"), default="all")
    p.add_argument("--states", type=int, default=3, help="latent states for the HMM-family archs")
    p.add_argument("--em-iters", type=int, default=30)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maneuverkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic scenario dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="JSON file of ScenarioConfig overrides")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a model and write a checkpoint")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--curve-out", help="CSV of the training loss / loglik curve")
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--pth", type=float, default=0.7)
    p.add_argument("--metrics", choices=("session", "macro", "both"), default="both")
    p.add_argument("--out", help="write a JSON report")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("anticipate", help="run streaming anticipation")
    p.add_argument("--model", required=True)
    p.add_argument("--pth", type=float, default=0.7)
    p.add_argument("--data", help="dataset file (one decision per sample)")
    p.add_argument("--stream", action="store_true", help="read step records from stdin")
    p.add_argument("--window-steps", type=int, default=None,
                   help="restrict context to the most recent N steps (default: full prefix)")
    p.set_defaults(func=cmd_anticipate)

    p = sub.add_parser("sweep", help="sweep the prediction threshold")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--grid", type=_grid, default=[round(0.1 * i, 2) for i in range(2, 10)])
    p.add_argument("--out", help="write a JSON report")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("xval", help="k-fold cross-validated evaluation")
    p.add_argument("--data", required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--grid", type=_grid, default=[round(0.1 * i, 2) for i in range(2, 10)])
    p.add_argument("--out", help="write a JSON report")
    _add_train_flags(p)
    p.set_defaults(func=cmd_xval)

    p = sub.add_parser("gradcheck", help="verify analytic gradients against finite differences")
    p.add_argument("--arch", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--hidden", type=int, default=6)
    p.add_argument("--steps", type=int, default=6)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("report", help="render a saved JSON report")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--format", choices=("csv", "text"), default="text")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, dataio.DataFormatError, RuntimeError) as err:
        log.error("%s", err)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Stream a sequence step by step and commit as soon as confidence allows.

The anticipation walk takes the argmax of the per-prefix probabilities at
each step and commits to the first non-straight event whose probability
strictly exceeds the threshold.  Raising the threshold trades earliness
(time-to-maneuver) for precision.  Over a long timeline with known event
onsets, each commitment scores as a true/false/false-positive prediction
and unseen onsets as misses, with a 5-second silence after each commitment.
"""

import numpy as np

from maneuverkit import (
    EVENTS,
    FusionRnnPredictor,
    ScenarioConfig,
    TrainConfig,
    anticipate,
    generate,
    init_fusion_model,
    run_session,
    train,
)
from maneuverkit.numerics import make_rng

data = generate(ScenarioConfig(seed=13), 400)
model = init_fusion_model("fusion", 6, 9, 16, EVENTS, make_rng(0))
report = train(data[:320], model, TrainConfig(epochs=8, learning_rate=2e-3, seed=1))
predictor = FusionRnnPredictor(report.model)

sample = next(s for s in data[320:] if EVENTS[s.label] == "right_turn")
for p_th in (0.5, 0.7, 0.9):
    result = anticipate(predictor, sample.xs, sample.zs, p_th)
    if result.t_pred is None:
        print(f"p_th={p_th}: no commitment, defaults to straight")
    else:
        print(f"p_th={p_th}: commits to {EVENTS[result.maneuver]} at step {result.t_pred} "
              f"of {sample.length}, {result.time_to_maneuver_seconds:.1f}s before the maneuver")

# Session scoring: three events stitched into one timeline with straight
# driving in between.
pieces = [s for s in data[320:] if EVENTS[s.label] != "straight"][:3]
gap = next(s for s in data[320:] if EVENTS[s.label] == "straight")
xs_parts, zs_parts, onsets, cursor = [], [], [], 0
for piece in pieces:
    xs_parts += [piece.xs, gap.xs]
    zs_parts += [piece.zs, gap.zs]
    cursor += piece.length
    onsets.append((cursor, EVENTS.index(EVENTS[piece.label])))
    cursor += gap.length
xs = np.concatenate(xs_parts)
zs = np.concatenate(zs_parts)

events = run_session(predictor, xs, zs, onsets, p_th=0.7)
print(f"\nsession over {xs.shape[0]} steps with {len(onsets)} onsets:")
for ev in events:
    ttm = f", {ev.ttm_steps * 0.8:.1f}s early" if ev.ttm_steps is not None else ""
    what = EVENTS[ev.predicted] if ev.predicted is not None else "(silent)"
    print(f"  {ev.kind:>3} at step {ev.step}: predicted {what}{ttm}")

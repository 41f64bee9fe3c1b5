"""Dialogue to film, end to end, against the in-process mock services.

    python3 demos/end_to_end.py

Every remote call (script generator, preference scorer, video generator,
frame extractor, embedder, judge) is answered by MockServices, so the run
is offline and deterministic.
"""

from __future__ import annotations

import json
from pathlib import Path

from cinescript import critic
from cinescript.director import execute_plan
from cinescript.metrics import embed_series, sample_times, vsa
from cinescript.mock import MockServices
from cinescript.planner import segment_scenes
from cinescript.reward import reward_breakdown
from cinescript.script_ir import serialize_script, validate_structure
from cinescript.services import (
    NO_WAIT,
    EmbedClient,
    HttpGenerator,
    LlmClient,
    MediaClient,
    PreferenceScorer,
    VideoGenClient,
)
from cinescript.verify import ScriptContext, correction_loop

ROOT = Path(__file__).resolve().parent.parent
CONTEXT = ROOT / "tests" / "fixtures" / "context.json"


def client(cls, mock):
    return cls("http://mock", transport=mock.transport(), retry=NO_WAIT)


def main() -> None:
    mock = MockServices()
    context = ScriptContext.from_dict(json.loads(CONTEXT.read_text(encoding="utf-8")))
    print(f"setting: {context.scene_setting}")
    print(f"{len(context.source_dialogue)} source lines, {len(context.characters)} characters\n")

    # 1. draft a script and repair it until the four checks pass
    outcome = correction_loop(context, client(HttpGenerator, mock))
    script = outcome.final_script
    print(f"correction loop: converged={outcome.converged} after {outcome.rounds_used} round(s)")
    for r in outcome.final_report.results:
        print(f"  {r.check_name:<24} {r.pass_fraction:.3f}")

    # 2. score it the way a training run would
    fmt = validate_structure(script)
    r_human = client(PreferenceScorer, mock).score(serialize_script(script))
    reward = reward_breakdown(outcome.final_report, fmt, r_human, alpha=0.4)
    print(f"\nreward: structure {reward.r_structure:.3f}, preference {r_human:.3f}, total {reward.r_total:.3f}")

    # 3. pack shots into generation scenes and render them in order
    plan = segment_scenes(script, window_s=10)
    print(f"\nplan (window 10 s, usable {plan.effective_window_s:g} s):")
    for scene in plan.scenes:
        print(f"  scene {scene.index}: {', '.join(scene.shot_ids)} ({scene.duration_s:g} s, cut: {scene.cut_rationale})")
    film = execute_plan(script, plan, client(VideoGenClient, mock), client(MediaClient, mock))
    print(f"\nfilm: {len(film.clips)} clips, {len(film.anchors)} continuity anchors")
    for clip, anchor in zip(film.clips[1:], film.anchors):
        print(f"  {clip.uri} starts from {anchor.uri}")

    # 4. measure alignment between sampled frames and shot instructions; the
    # mock embedder returns hash-seeded noise, so expect a score near zero
    frames = [(t, f"film#t={t:g}") for t in sample_times(script)]
    emb = embed_series(script, frames, client(EmbedClient, mock))
    print(f"\nVSA over {len(frames)} frames: {vsa(script, emb).score:.2f}")

    # 5. ask the judge for a rubric scorecard
    slots = {"source_dialogue": "\n".join(d.text for d in context.source_dialogue),
             "generated_script": serialize_script(script)}
    cards, failed = critic.evaluate([slots], critic.SCRIPT_EVAL, client(LlmClient, mock))
    print("\njudge scorecard:")
    for dim, score in cards[0].scores.items():
        print(f"  {dim:<28} {score:g}")

    calls = {}
    for t in mock.transcript:
        calls[t["endpoint"]] = calls.get(t["endpoint"], 0) + 1
    print("\nservice calls:", ", ".join(f"{k} x{v}" for k, v in sorted(calls.items())))


if __name__ == "__main__":
    main()

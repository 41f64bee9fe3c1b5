"""How the scene planner chooses its cuts.

    python3 demos/planner_tour.py

The planner always uses the fewest scenes that fit 90% of the generation
window.  Among cut points that keep that minimum, it prefers semantic
breakpoints, then boundaries next to a fixed camera.
"""

from __future__ import annotations

from cinescript.errors import UnplannableShot
from cinescript.planner import segment_scenes
from cinescript.script_ir import script_from_dict


def durations_script(durations, breakpoints=(), fixed=()):
    shots, t = [], 0.0
    for i, d in enumerate(durations):
        is_fixed = i in fixed
        shots.append({
            "id": f"s{i + 1}", "start": t, "end": t + d,
            "shot_type": "medium", "camera_movement": "static" if is_fixed else "pan",
            "fixed_camera": is_fixed, "description": f"Shot {i + 1}.", "dialogue": [],
            "positions": {}, "semantic_breakpoint": i in breakpoints,
        })
        t += d
    return script_from_dict(
        {"scene_setting": "A studio.", "characters": [], "source_dialogue": [], "shots": shots}
    )


def show(title, durations, window, **kw):
    print(f"{title}\n  durations {durations}, window {window} s")
    try:
        plan = segment_scenes(durations_script(durations, **kw), window)
    except UnplannableShot as exc:
        print(f"  -> {exc}\n")
        return
    for scene in plan.scenes:
        print(f"  [{' '.join(scene.shot_ids)}] {scene.duration_s:g} s, cut: {scene.cut_rationale}")
    print()


def main() -> None:
    show("Capacity only: fill each scene as far as it goes", [4, 5, 6], 10)
    show("A breakpoint after s1 costs nothing here, so the cut moves there", [4, 2, 3, 3], 10, breakpoints={0})
    show("A breakpoint that would force a third scene is ignored", [4, 5, 6], 10, breakpoints={0})
    show("Without a breakpoint, a fixed-camera boundary is the next best cut", [4, 2, 3, 3], 10, fixed={1})
    show("A shot longer than the usable window cannot be planned", [4, 9.5], 10)


if __name__ == "__main__":
    main()

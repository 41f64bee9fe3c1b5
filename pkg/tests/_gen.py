"""Random document builders shared by the test modules."""

from __future__ import annotations

import json
import random

SHOT_TYPES = ["wide", "medium", "close_up", "panoramic"]
MOVES = ["static", "pan", "tilt", "track", "zoom", "handheld"]
WORDS = ["lantern", "door", "rain", "glance", "pause", "smile", "café", "naïve", "雨", "«quiet»", "step", "\"hi\""]
NAMES = ["Anna", "Ben", "Chen Yu", "Dario", "Émile", "Farah"]


def _text(rng: random.Random, lo: int = 1, hi: int = 8) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(lo, hi)))


def _num(rng: random.Random, lo: float, hi: float) -> float:
    # mix of round and arbitrary floats; both must survive JSON exactly
    return round(rng.uniform(lo, hi), rng.choice([0, 1, 3, 17]))


def shot_doc(sid: str, start: float, end: float, **kw) -> dict:
    doc = {
        "id": sid,
        "start": start,
        "end": end,
        "shot_type": "medium",
        "camera_movement": "static",
        "fixed_camera": True,
        "description": "A medium shot.",
        "dialogue": [],
        "positions": {},
        "semantic_breakpoint": False,
    }
    doc.update(kw)
    return doc


def script_doc(shots: list[dict], characters=None, setting="An empty courtyard.", source=None) -> dict:
    return {
        "scene_setting": setting,
        "characters": characters or [],
        "source_dialogue": source or [],
        "shots": shots,
    }


def durations_doc(durations, breakpoints=(), fixed=None) -> dict:
    """Contiguous shots s1..sn with the given durations."""
    shots = []
    t = 0.0
    for i, d in enumerate(durations):
        is_fixed = True if fixed is None else fixed[i]
        shots.append(
            shot_doc(
                f"s{i + 1}", t, t + d,
                camera_movement="static" if is_fixed else "pan",
                fixed_camera=is_fixed,
                semantic_breakpoint=i in breakpoints,
            )
        )
        t += d
    return script_doc(shots)


def random_script_doc(rng: random.Random, max_shots: int = 8) -> dict:
    n_chars = rng.randint(0, 4)
    chars = []
    for i in range(n_chars):
        c = {
            "id": f"c{i}",
            "name": NAMES[i],
            "appearance": _text(rng),
            "initial_position": [_num(rng, -10, 10), _num(rng, -10, 10)],
        }
        if rng.random() < 0.2:
            c["voice"] = {"pitch": rng.randint(1, 5), "tags": [_text(rng, 1, 2)]}
        chars.append(c)
    ids = [c["id"] for c in chars]
    source = []
    for _ in range(rng.randint(0, 5)):
        speaker = rng.choice(ids + [None]) if ids else None
        source.append({"speaker": speaker, "text": _text(rng) if rng.random() < 0.9 else "[No Dialogue]"})
    shots = []
    t = _num(rng, 0, 5)
    for i in range(rng.randint(0, max_shots)):
        t += rng.choice([0.0, 0.0, _num(rng, 0, 2)])
        d = min(max(_num(rng, 0.5, 9.9), 0.5), 9.9)  # rounding can reach 10
        move = rng.choice(MOVES)
        fixed = True if move == "static" else rng.random() < 0.4
        shot = {
            "id": f"shot-{i}",
            "start": t,
            "end": t + d,
            "shot_type": rng.choice(SHOT_TYPES),
            "camera_movement": move,
            "fixed_camera": fixed,
            "description": _text(rng, 2, 12),
            "dialogue": [
                {"speaker": rng.choice(ids + [None]) if ids else None, "text": _text(rng)}
                for _ in range(rng.randint(0, 3))
            ],
            "positions": {cid: [_num(rng, -10, 10), _num(rng, -10, 10)] for cid in ids if rng.random() < 0.5},
            "semantic_breakpoint": rng.random() < 0.3,
        }
        if rng.random() < 0.2:
            shot["camera_notes"] = _text(rng, 1, 3)
        if rng.random() < 0.2:
            shot["lens_mm"] = rng.choice([24, 35, 50.5])
        shots.append(shot)
        t += d
    doc = script_doc(shots, chars, _text(rng, 3, 10), source)
    if rng.random() < 0.2:
        doc["title"] = _text(rng, 1, 3)
    return doc


def dumps(doc) -> str:
    return json.dumps(doc, ensure_ascii=False)

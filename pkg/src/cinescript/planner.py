"""Shot-duration checks and packing of shots into generation-window scenes.

Scenes are filled left to right.  When the next shot would overflow the
effective window (90% of the model's window), a cut is forced somewhere inside
the current scene.  The cut goes to the latest boundary that ends on a semantic
breakpoint, else the latest that ends on a fixed camera, else the capacity
boundary itself, but only if moving it there does not cost an extra scene
downstream.  Keeping the scene count minimal is checked in the tests against
brute-force enumeration of every cut set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .errors import InvalidConfig, UnplannableShot
from .script_ir import CinematicScript, Shot

SAFETY_BUFFER = 0.10
# absolute slack for float sums of shot durations
CAPACITY_TOL = 1e-9

RATIONALES = ("semantic_breakpoint", "fixed_camera", "capacity")


@dataclass(frozen=True)
class ShotViolation:
    shot_id: str
    reason: str


@dataclass(frozen=True)
class ConstraintReport:
    violations: tuple[ShotViolation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": [v.__dict__ for v in self.violations]}


@dataclass(frozen=True)
class Scene:
    index: int
    shot_ids: tuple[str, ...]
    duration_s: float
    cut_rationale: str

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "shot_ids": list(self.shot_ids),
            "duration": self.duration_s,
            "cut_rationale": self.cut_rationale,
        }


@dataclass(frozen=True)
class ScenePlan:
    scenes: tuple[Scene, ...]
    window_s: float

    @property
    def effective_window_s(self) -> float:
        return effective_window(self.window_s)

    @property
    def shot_ids(self) -> list[str]:
        return [sid for sc in self.scenes for sid in sc.shot_ids]

    def to_dict(self) -> dict:
        return {
            "window": self.window_s,
            "effective_window": self.effective_window_s,
            "scenes": [s.to_dict() for s in self.scenes],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenePlan":
        return cls(
            tuple(
                Scene(s["index"], tuple(s["shot_ids"]), float(s["duration"]), s["cut_rationale"])
                for s in doc["scenes"]
            ),
            float(doc["window"]),
        )


def effective_window(window_s: float) -> float:
    return (1.0 - SAFETY_BUFFER) * window_s


def validate_shot_constraints(script: CinematicScript, max_shot_seconds: float = 10.0) -> ConstraintReport:
    if not max_shot_seconds > 0:
        raise InvalidConfig(f"max_shot_seconds must be positive, got {max_shot_seconds!r}")
    return ConstraintReport(
        tuple(
            ShotViolation(s.id, f"duration {s.duration_s:g} s exceeds {max_shot_seconds:g} s")
            for s in script.shots
            if s.duration_s > max_shot_seconds
        )
    )


def boundary_rationale(shot: Shot) -> str:
    """Preference class of a cut placed right after ``shot``."""
    if shot.is_semantic_breakpoint:
        return "semantic_breakpoint"
    if shot.camera.is_fixed_position:
        return "fixed_camera"
    return "capacity"


def preference_score(shots: Sequence[Shot], cut_after: Sequence[int]) -> int:
    """2 per semantic-breakpoint cut plus 1 per fixed-camera cut."""
    weights = {"semantic_breakpoint": 2, "fixed_camera": 1, "capacity": 0}
    return sum(weights[boundary_rationale(shots[i])] for i in cut_after)


def _reach(durations: Sequence[float], cap: float) -> list[int]:
    """reach[i] = last index j such that shots i..j fit in one scene."""
    # fresh left-to-right sums so the result agrees bit-for-bit with Scene.duration_s
    n = len(durations)
    reach = []
    for i in range(n):
        total = 0.0
        j = i
        while j < n and total + durations[j] <= cap + CAPACITY_TOL:
            total += durations[j]
            j += 1
        reach.append(j - 1)
    return reach


def segment_scenes(script: CinematicScript, window_s: float) -> ScenePlan:
    if not window_s > 0:
        raise InvalidConfig(f"window_s must be positive, got {window_s!r}")
    cap = effective_window(window_s)
    shots = script.shots
    for s in shots:
        if s.duration_s > cap + CAPACITY_TOL:
            raise UnplannableShot(s.id, s.duration_s, cap)

    durations = [s.duration_s for s in shots]
    n = len(shots)
    reach = _reach(durations, cap)
    # fewest scenes needed for shots[i:], filled greedily (optimal for ordered packing)
    need = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        need[i] = 1 + need[reach[i] + 1]

    scenes = []
    start = 0
    while start < n:
        end = reach[start]
        if end < n - 1:
            target = need[end + 1]
            chosen = end
            for wanted in ("semantic_breakpoint", "fixed_camera"):
                hit = next(
                    (
                        j
                        for j in range(end, start - 1, -1)
                        if boundary_rationale(shots[j]) == wanted and need[j + 1] == target
                    ),
                    None,
                )
                if hit is not None:
                    chosen = hit
                    break
            end = chosen
        members = shots[start:end + 1]
        scenes.append(
            Scene(
                index=len(scenes),
                shot_ids=tuple(s.id for s in members),
                duration_s=sum(s.duration_s for s in members),
                cut_rationale=boundary_rationale(shots[end]),
            )
        )
        start = end + 1
    return ScenePlan(tuple(scenes), window_s)

"""Scene-by-scene video generation with last-frame anchoring.

Scene ``i + 1`` is requested only after scene ``i`` has come back and its
final frame has been extracted; that frame's URI and a fixed continuity
sentence are passed along with the next prompt.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Protocol

from .errors import MediaError, ServiceError, VideoGenError
from .planner import Scene, ScenePlan
from .script_ir import CinematicScript, format_timestamp

log = logging.getLogger(__name__)

CONTINUITY_PREAMBLE = "Continuing from the previous scene."


class VideoService(Protocol):
    def generate(self, prompt: str, duration_s: float, anchor_uri: str | None) -> tuple[str, float]: ...


class MediaService(Protocol):
    def extract_frame(self, clip_uri: str, position: str = "last") -> str: ...


@dataclass(frozen=True)
class ClipRef:
    scene_index: int
    uri: str
    duration_s: float

    def __post_init__(self):
        if not self.duration_s > 0:
            raise ValueError(f"clip duration must be positive, got {self.duration_s!r}")


@dataclass(frozen=True)
class FrameRef:
    source: ClipRef
    kind: str
    uri: str


@dataclass
class FilmArtifact:
    clips: list[ClipRef] = field(default_factory=list)
    anchors: list[FrameRef] = field(default_factory=list)
    prompt_log: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "clips": [{"scene_index": c.scene_index, "uri": c.uri, "duration_s": c.duration_s} for c in self.clips],
            "anchors": [
                {"source_scene": a.source.scene_index, "source_uri": a.source.uri, "kind": a.kind, "uri": a.uri}
                for a in self.anchors
            ],
            "prompt_log": list(self.prompt_log),
        }


def build_scene_prompt(script: CinematicScript, scene: Scene, anchor: FrameRef | None = None) -> str:
    lines = []
    if anchor is not None:
        lines.append(CONTINUITY_PREAMBLE)
    lines.append(f"Setting: {script.scene_setting}")
    names = {c.id: c.name for c in script.characters}
    for sid in scene.shot_ids:
        shot = script.shot(sid)  # raises UnknownShot
        iv = shot.interval
        lines.append("")
        lines.append(
            f"Shot {shot.id} [{format_timestamp(iv.start_s)}~{format_timestamp(iv.end_s)}] "
            f"Camera: {shot.camera.render()}"
        )
        lines.append(shot.description)
        for d in shot.dialogue:
            who = names.get(d.speaker_id, d.speaker_id) if d.speaker_id else "Narration"
            lines.append(f"{who}: {d.text}")
    return "\n".join(lines) + "\n"


def extract_anchor(clip: ClipRef, media: MediaService) -> FrameRef:
    try:
        uri = media.extract_frame(clip.uri, "last")
    except ServiceError as exc:
        raise MediaError(f"last frame of {clip.uri}: {exc}", attempts=exc.attempts) from exc
    return FrameRef(clip, "last", uri)


def execute_plan(
    script: CinematicScript, plan: ScenePlan, video: VideoService, media: MediaService
) -> FilmArtifact:
    """Generate every scene in order; returns the assembled artifact.

    On a failed scene the run stops and the raised VideoGenError/MediaError
    carries the finished part of the film as ``partial``.
    """
    for scene in plan.scenes:
        for sid in scene.shot_ids:
            script.shot(sid)
    film = FilmArtifact()
    anchor: FrameRef | None = None
    for i, scene in enumerate(plan.scenes):
        prompt = build_scene_prompt(script, scene, anchor)
        try:
            uri, duration = video.generate(prompt, scene.duration_s, anchor.uri if anchor else None)
        except ServiceError as exc:
            raise VideoGenError(str(exc), scene_index=i, partial=film, attempts=exc.attempts) from exc
        clip = ClipRef(i, uri, duration)
        film.clips.append(clip)
        film.prompt_log.append(prompt)
        if anchor is not None:
            film.anchors.append(anchor)
        log.info("scene %d -> %s", i, uri)
        if i + 1 < len(plan.scenes):
            try:
                anchor = extract_anchor(clip, media)
            except MediaError as exc:
                exc.partial = film
                raise
    return film

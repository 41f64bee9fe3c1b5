"""Visual-script alignment and global text alignment from embeddings.

Embeddings are supplied, never computed here: either read from a JSON Lines
file or fetched through an embedding client.  Similarity is plain cosine and
scores are reported on a 0-100 style scale (raw cosine times 100, negatives
kept).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np

from .errors import DimMismatch, MissingInstruction, NoFrames, NoFramesInIntervals, ZeroVector
from .script_ir import CinematicScript, Shot


def cosine_sim(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimMismatch(f"dimensions differ: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ZeroVector("cosine similarity of a zero vector is undefined")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


@dataclass(frozen=True)
class EmbeddingSeries:
    """Per-frame visual embeddings plus one instruction embedding per shot."""

    times: np.ndarray  # (n,)
    frames: np.ndarray  # (n, dim)
    shot_instructions: Mapping[str, np.ndarray]

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        frames = np.asarray(self.frames, dtype=float)
        if frames.size == 0:
            frames = frames.reshape(0, self.dim_hint())
        if frames.ndim != 2 or frames.shape[0] != times.shape[0]:
            raise DimMismatch(f"{times.shape[0]} frame times but frames array of shape {frames.shape}")
        if np.any(np.diff(times) <= 0):
            raise ValueError("frame times must be strictly increasing")
        instr = {k: np.asarray(v, dtype=float).reshape(-1) for k, v in self.shot_instructions.items()}
        dims = {frames.shape[1]} if frames.shape[0] else set()
        dims |= {v.shape[0] for v in instr.values()}
        if len(dims) > 1:
            raise DimMismatch(f"mixed embedding dimensions {sorted(dims)}")
        if frames.shape[0] and np.any(np.linalg.norm(frames, axis=1) == 0):
            raise ZeroVector("zero frame embedding")
        for k, v in instr.items():
            if not np.any(v):
                raise ZeroVector(f"zero instruction embedding for shot {k!r}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "shot_instructions", instr)

    def dim_hint(self) -> int:
        for v in self.shot_instructions.values():
            return len(v)
        return 0

    @property
    def dim(self) -> int:
        if self.frames.shape[0]:
            return self.frames.shape[1]
        return self.dim_hint()

    @classmethod
    def from_frames(
        cls, frames: Iterable[tuple[float, Sequence[float]]], shot_instructions: Mapping[str, Sequence[float]]
    ) -> "EmbeddingSeries":
        frames = list(frames)
        dim = len(next(iter(shot_instructions.values()))) if shot_instructions else 0
        times = np.array([t for t, _ in frames], dtype=float)
        vecs = np.array([v for _, v in frames], dtype=float) if frames else np.zeros((0, dim))
        return cls(times, vecs, dict(shot_instructions))


def load_embeddings(path: str | Path) -> EmbeddingSeries:
    """Read the JSON Lines embedding format (``frame`` and ``instruction`` lines)."""
    frames = []
    instr = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            rec = json.loads(raw)
            kind = rec.get("kind")
            if kind == "frame":
                frames.append((float(rec["t"]), rec["e"]))
            elif kind == "instruction":
                instr[rec["shot_id"]] = rec["e"]
            else:
                raise ValueError(f"{path}:{lineno}: unknown record kind {kind!r}")
    frames.sort(key=lambda f: f[0])
    return EmbeddingSeries.from_frames(frames, instr)


def dump_embeddings(series: EmbeddingSeries, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t, v in zip(series.times, series.frames):
            fh.write(json.dumps({"kind": "frame", "t": float(t), "e": [float(x) for x in v]}) + "\n")
        for sid, v in series.shot_instructions.items():
            fh.write(json.dumps({"kind": "instruction", "shot_id": sid, "e": [float(x) for x in v]}) + "\n")


class Embedder(Protocol):
    def embed(self, kind: str, payload: str) -> list[float]: ...


def instruction_text(shot: Shot) -> str:
    """Text handed to the text encoder for one shot."""
    return f"{shot.camera.render()}. {shot.description}"


def embed_series(
    script: CinematicScript, frames: Iterable[tuple[float, str]], embedder: Embedder
) -> EmbeddingSeries:
    """Build a series by embedding frame payloads (e.g. image URIs) and shot instructions."""
    frame_vecs = [(t, embedder.embed("image", payload)) for t, payload in frames]
    instr = {s.id: embedder.embed("text", instruction_text(s)) for s in script.shots}
    return EmbeddingSeries.from_frames(frame_vecs, instr)


def sample_times(script: CinematicScript, fps: float = 1.0) -> list[float]:
    """Frame timestamps at ``fps`` over the script's span (default one per second)."""
    if not script.shots:
        return []
    t0 = script.shots[0].interval.start_s
    t1 = script.shots[-1].interval.end_s
    n = int(math.floor((t1 - t0) * fps))
    return [t0 + k / fps for k in range(n + 1) if t0 + k / fps < t1]


@dataclass(frozen=True)
class ShotAlignment:
    mean_sim: float | None
    frame_count: int


@dataclass(frozen=True)
class VsaResult:
    score: float
    per_shot: Mapping[str, ShotAlignment]
    frames_used: int

    def to_dict(self) -> dict:
        return {
            "score": self.score,
            "frames_used": self.frames_used,
            "per_shot": {
                k: {"mean_sim": v.mean_sim, "frame_count": v.frame_count} for k, v in self.per_shot.items()
            },
        }


def _unit_rows(m: np.ndarray) -> np.ndarray:
    return m / np.linalg.norm(m, axis=-1, keepdims=True)


def vsa(script: CinematicScript, emb: EmbeddingSeries) -> VsaResult:
    """Frame-weighted mean cosine between each frame and the instruction of the
    shot whose interval holds it, times 100.  Frames outside every interval
    are ignored.
    """
    for s in script.shots:
        if s.id not in emb.shot_instructions:
            raise MissingInstruction(s.id)
    unit_frames = _unit_rows(emb.frames) if len(emb.times) else emb.frames
    total = 0.0
    count = 0
    per_shot = {}
    for s in script.shots:
        instr = emb.shot_instructions[s.id]
        if instr.shape[0] != emb.dim:
            raise DimMismatch(f"instruction for {s.id!r} has dim {instr.shape[0]}, frames have {emb.dim}")
        mask = (emb.times >= s.interval.start_s) & (emb.times < s.interval.end_s)
        sims = unit_frames[mask] @ (instr / np.linalg.norm(instr))
        n = int(mask.sum())
        shot_sum = float(sum(sims.tolist()))  # ascending frame time
        per_shot[s.id] = ShotAlignment(shot_sum / n if n else None, n)
        total += shot_sum
        count += n
    if count == 0:
        raise NoFramesInIntervals("no frame falls inside any shot interval")
    return VsaResult(100.0 * total / count, per_shot, count)


def clip_score(emb: EmbeddingSeries, global_text: Sequence[float]) -> float:
    """100 x mean cosine between every frame and one global text embedding."""
    if len(emb.times) == 0:
        raise NoFrames("clip score needs at least one frame")
    text = np.asarray(global_text, dtype=float).reshape(-1)
    if text.shape[0] != emb.dim:
        raise DimMismatch(f"text embedding dim {text.shape[0]} vs frame dim {emb.dim}")
    if not np.any(text):
        raise ZeroVector("zero text embedding")
    sims = _unit_rows(emb.frames) @ (text / np.linalg.norm(text))
    return 100.0 * float(sum(sims.tolist())) / len(sims)

"""LLM-judge rubric scoring: prompt rendering, scorecard parsing, aggregation.

Templates are versioned text files under ``prompts/``; rendering replaces
their bracketed placeholders and touches nothing else.
"""

from __future__ import annotations

import json
import logging
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Protocol, Sequence

from .errors import (
    CineError,
    EmptyInput,
    MissingDimension,
    MissingSlot,
    MixedRubrics,
    NoJsonFound,
    NonIntegerScore,
    ScorecardError,
    ScoreOutOfRange,
    ServiceError,
    UnknownDimension,
)

log = logging.getLogger(__name__)

TEMPLATE_VERSION = "v1"


@dataclass(frozen=True)
class Rubric:
    name: str
    dimensions: tuple[str, ...]
    decimals_allowed: bool
    slots: Mapping[str, str]  # slot name -> placeholder text in the template
    range: tuple[float, float] = (0.0, 5.0)
    # extra top-level keys a judge may add next to the scores
    meta_keys: frozenset[str] = frozenset()

    def template(self, version: str = TEMPLATE_VERSION) -> str:
        return load_template(self.name, version)


SCRIPT_EVAL = Rubric(
    "script_eval",
    ("Format Compliance", "Shot Division Rationality", "Content Completeness", "Narrative Coherence"),
    decimals_allowed=False,
    slots={
        "source_dialogue": "{Insert Origin Dialogue Here}",
        "generated_script": "{Insert Generated JSON Script Here}",
    },
)

VIDEO_EVAL = Rubric(
    "video_eval",
    ("Audio-Visual Synchronization", "Emotional Consistency", "Rhythm Coordination", "Voice-Lip Sync"),
    decimals_allowed=False,
    slots={
        "reference_script": "{Insert Script Text Here}",
        "reference_audio_ref": "{Insert Audio File Here}",
        "video_ref": "{Insert Video File Here}",
    },
)

VIDEO_CINEMATIC = Rubric(
    "video_cinematic",
    (
        "Cinematic Camera Articulation",
        "Kinetic Body Language & Blocking",
        "Visual Descriptive Fidelity",
        "Emotional Arc & Micro-Expressions",
        "Narrative Pacing & Timing",
    ),
    decimals_allowed=True,
    slots={
        "reference_script": "{Insert Reference Script Here}",
        "video_ref": "{Video File to be Evaluated}",
    },
    meta_keys=frozenset({"Final Cinematic Grade", "Overall Assessment", "reasoning", "Reasoning"}),
)

RUBRICS: dict[str, Rubric] = {r.name: r for r in (SCRIPT_EVAL, VIDEO_EVAL, VIDEO_CINEMATIC)}


def get_rubric(name: str) -> Rubric:
    try:
        return RUBRICS[name]
    except KeyError:
        raise KeyError(f"unknown rubric {name!r}; choose from {sorted(RUBRICS)}") from None


def load_template(name: str, version: str = TEMPLATE_VERSION) -> str:
    return resources.files("cinescript").joinpath(f"prompts/{name}.{version}.txt").read_text(encoding="utf-8")


def render_prompt(rubric: Rubric, slots: Mapping[str, str], version: str = TEMPLATE_VERSION) -> str:
    """Substitute every placeholder in one pass, so slot text is never rescanned."""
    for name in rubric.slots:
        if name not in slots:
            raise MissingSlot(name)
    by_placeholder = {ph: str(slots[name]) for name, ph in rubric.slots.items()}
    pattern = re.compile("|".join(re.escape(ph) for ph in by_placeholder))
    return pattern.sub(lambda m: by_placeholder[m.group(0)], rubric.template(version))


@dataclass(frozen=True)
class Scorecard:
    rubric: str
    scores: Mapping[str, float]
    raw_response: str

    def to_dict(self) -> dict:
        return {"rubric": self.rubric, "scores": dict(self.scores), "raw_response": self.raw_response}


def _first_object(text: str) -> dict:
    decoder = json.JSONDecoder()
    for m in re.finditer(r"\{", text):
        try:
            obj, _ = decoder.raw_decode(text, m.start())
        except ValueError:
            continue
        if isinstance(obj, dict):
            return obj
    raise NoJsonFound("no JSON object found in the judge response")


def _score_value(rubric: Rubric, dim: str, value) -> float:
    if rubric.decimals_allowed and isinstance(value, dict) and "score" in value:
        value = value["score"]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScoreOutOfRange(f"{dim!r}: score {value!r} is not a number")
    x = float(value)
    lo, hi = rubric.range
    if math.isnan(x) or not lo <= x <= hi:
        raise ScoreOutOfRange(f"{dim!r}: score {value!r} outside [{lo:g}, {hi:g}]")
    if not rubric.decimals_allowed and not x.is_integer():
        raise NonIntegerScore(f"{dim!r}: score {value!r} must be a whole number")
    return x


def parse_scorecard(response: str, rubric: Rubric) -> Scorecard:
    obj = _first_object(response)
    if rubric.decimals_allowed and isinstance(obj.get("scores"), dict):
        obj = obj["scores"]
    wanted = set(rubric.dimensions)
    for key in obj:
        if key not in wanted and key not in rubric.meta_keys:
            raise UnknownDimension(f"unknown dimension {key!r} for rubric {rubric.name}")
    missing = [d for d in rubric.dimensions if d not in obj]
    if missing:
        raise MissingDimension(f"missing dimension(s) {missing} for rubric {rubric.name}")
    scores = {d: _score_value(rubric, d, obj[d]) for d in rubric.dimensions}
    return Scorecard(rubric.name, scores, response)


class Judge(Protocol):
    def complete(self, prompt: str) -> str: ...


@dataclass(frozen=True)
class FailedItem:
    index: int
    error: CineError
    attempts: int

    def to_dict(self) -> dict:
        return {"index": self.index, "attempts": self.attempts, "error": self.error.to_dict()}


@dataclass
class EvalRun:
    scorecards: list[Scorecard] = field(default_factory=list)
    failed: list[FailedItem] = field(default_factory=list)
    indices: list[int] = field(default_factory=list)  # item index of each scorecard

    def __iter__(self):
        return iter((self.scorecards, self.failed))


def _evaluate_one(index: int, slots, rubric: Rubric, judge: Judge, retries: int):
    prompt = render_prompt(rubric, slots)
    error: CineError | None = None
    attempts = 0
    for attempts in range(1, retries + 2):
        try:
            text = judge.complete(prompt)
        except ServiceError as exc:
            # the client already retried transport failures
            return FailedItem(index, exc, attempts + exc.attempts - 1)
        try:
            return parse_scorecard(text, rubric)
        except ScorecardError as exc:
            log.info("item %d attempt %d: %s", index, attempts, exc)
            error = exc
    return FailedItem(index, error, attempts)


def evaluate(
    items: Sequence[Mapping[str, str]],
    rubric: Rubric,
    judge: Judge,
    retries: int = 2,
    max_in_flight: int = 4,
) -> EvalRun:
    """Score every item; unparseable answers are re-asked with the same prompt.

    Unpacks as ``(scorecards, failed)``; both lists follow input order.
    """
    if retries < 0:
        raise ValueError("retries must be >= 0")
    for slots in items:  # fail fast on a bad slot map before any call
        for name in rubric.slots:
            if name not in slots:
                raise MissingSlot(name)
    with ThreadPoolExecutor(max_workers=max(1, max_in_flight)) as pool:
        results = list(pool.map(lambda p: _evaluate_one(p[0], p[1], rubric, judge, retries), enumerate(items)))
    run = EvalRun()
    for i, r in enumerate(results):
        if isinstance(r, Scorecard):
            run.scorecards.append(r)
            run.indices.append(i)
        else:
            run.failed.append(r)
    return run


@dataclass(frozen=True)
class EvalSummary:
    rubric: str
    per_dimension_mean: Mapping[str, float]
    overall_mean: float
    n: int

    def to_dict(self) -> dict:
        return {
            "rubric": self.rubric,
            "per_dimension_mean": dict(self.per_dimension_mean),
            "overall_mean": self.overall_mean,
            "n": self.n,
        }


def aggregate(cards: Sequence[Scorecard]) -> EvalSummary:
    if not cards:
        raise EmptyInput("aggregate needs at least one scorecard")
    names = {c.rubric for c in cards}
    if len(names) > 1:
        raise MixedRubrics(f"scorecards from several rubrics: {sorted(names)}")
    rubric = get_rubric(cards[0].rubric)
    means = {d: math.fsum(c.scores[d] for c in cards) / len(cards) for d in rubric.dimensions}
    # clamp rounding drift back into the observed range
    for d in means:
        vals = [c.scores[d] for c in cards]
        means[d] = min(max(means[d], min(vals)), max(vals))
    overall = math.fsum(means.values()) / len(means)
    return EvalSummary(rubric.name, means, overall, len(cards))

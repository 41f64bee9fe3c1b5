"""Rule-based script verification and the iterative correction loop.

Four checks score a script, each as a pass fraction over its own unit:

* dialogue completeness: one unit per source dialogue line
* character consistency: one unit per (shot, character) mention
* scene coherence: one unit per adjacent shot pair
* physical rationality: one unit per (adjacent shot pair, character) that is
  positioned in both shots

Appearance and location reasoning is lexicon based (``data/lexicon.json``),
never free-text NLP.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Protocol, Sequence

from .errors import CineError, GeneratorError, InvalidConfig, ServiceError
from .script_ir import (
    CharacterProfile,
    CinematicScript,
    DialogueLine,
    Shot,
    parse_script,
    script_from_dict,
    script_to_dict,
)

log = logging.getLogger(__name__)

CHECK_NAMES = (
    "dialogue_completeness",
    "character_consistency",
    "scene_coherence",
    "physical_rationality",
)

DEFAULT_MAX_SPEED = 5.0
DEFAULT_MAX_ROUNDS = 5

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def normalize_ws(text: str) -> str:
    return " ".join(text.split())


# --------------------------------------------------------------------------
# lexicon


@dataclass(frozen=True)
class Lexicon:
    """Controlled vocabulary: attribute name to allowed values.

    ``garment`` values act as head nouns; every other attribute except
    ``location`` acts as a modifier ("red", "long") attached to the head that
    follows it.
    """

    attributes: Mapping[str, tuple[str, ...]]
    head_attribute: str = "garment"
    location_attribute: str = "location"

    @classmethod
    def from_entries(cls, entries: Iterable[Mapping[str, Any]], **kw) -> "Lexicon":
        attrs: dict[str, tuple[str, ...]] = {}
        for e in entries:
            attrs[e["attribute"]] = attrs.get(e["attribute"], ()) + tuple(
                v.lower() for v in e["values"]
            )
        return cls(attrs, **kw)

    @classmethod
    def load(cls, path: str | Path) -> "Lexicon":
        return cls.from_entries(json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def default(cls) -> "Lexicon":
        text = resources.files("cinescript").joinpath("data/lexicon.json").read_text(encoding="utf-8")
        return cls.from_entries(json.loads(text))

    def _modifier_index(self) -> dict[str, str]:
        out = {}
        for attr, values in self.attributes.items():
            if attr in (self.head_attribute, self.location_attribute):
                continue
            for v in values:
                out[v] = attr
        return out

    def attribute_pairs(self, text: str) -> set[tuple[str, str, str]]:
        """(attribute, modifier, head) triples such as ("color", "red", "coat")."""
        modifiers = self._modifier_index()
        heads = set(self.attributes.get(self.head_attribute, ()))
        toks = tokenize(text)
        found = set()
        for i, tok in enumerate(toks):
            if tok not in modifiers:
                continue
            j = i + 1
            while j < len(toks) and toks[j] in modifiers:
                j += 1
            if j < len(toks) and toks[j] in heads:
                found.add((modifiers[tok], tok, toks[j]))
        return found

    def locations(self, text: str) -> frozenset[str]:
        toks = tokenize(text)
        found = set()
        for value in self.attributes.get(self.location_attribute, ()):
            phrase = value.split()
            n = len(phrase)
            if any(toks[i:i + n] == phrase for i in range(len(toks) - n + 1)):
                found.add(value)
        return frozenset(found)


_DEFAULT_LEXICON: Lexicon | None = None


def default_lexicon() -> Lexicon:
    global _DEFAULT_LEXICON
    if _DEFAULT_LEXICON is None:
        _DEFAULT_LEXICON = Lexicon.default()
    return _DEFAULT_LEXICON


# --------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class Violation:
    location: str
    message: str

    def to_dict(self) -> dict:
        return {"location": self.location, "message": self.message}


@dataclass(frozen=True)
class CheckResult:
    check_name: str
    pass_fraction: float
    violations: tuple[Violation, ...] = ()
    total_units: int = 0

    @classmethod
    def from_units(cls, name: str, total: int, violations: Sequence[Violation]) -> "CheckResult":
        # no units means nothing can fail
        frac = 1.0 if total == 0 else 1.0 - len(violations) / total
        return cls(name, frac, tuple(violations), total)

    def to_dict(self) -> dict:
        return {
            "check_name": self.check_name,
            "pass_fraction": self.pass_fraction,
            "total_units": self.total_units,
            "violations": [v.to_dict() for v in self.violations],
        }


@dataclass(frozen=True)
class VerificationReport:
    results: tuple[CheckResult, ...]

    @property
    def all_pass(self) -> bool:
        return all(r.pass_fraction == 1.0 for r in self.results)

    @property
    def mean_pass_fraction(self) -> float:
        return math.fsum(r.pass_fraction for r in self.results) / len(self.results)

    def __getitem__(self, name: str) -> CheckResult:
        for r in self.results:
            if r.check_name == name:
                return r
        raise KeyError(name)

    @property
    def violations(self) -> list[Violation]:
        return [v for r in self.results for v in r.violations]

    def to_dict(self) -> dict:
        return {"all_pass": self.all_pass, "results": [r.to_dict() for r in self.results]}


@dataclass(frozen=True)
class VerifyConfig:
    max_speed: float = DEFAULT_MAX_SPEED
    lexicon: Lexicon | None = None

    def resolved_lexicon(self) -> Lexicon:
        return self.lexicon if self.lexicon is not None else default_lexicon()


# --------------------------------------------------------------------------
# checks


def check_dialogue_completeness(script: CinematicScript) -> CheckResult:
    shot_texts = [normalize_ws(d.text) for s in script.shots for d in s.dialogue]
    has_marker = any(d.is_no_dialogue_marker for s in script.shots for d in s.dialogue)
    violations = []
    for i, line in enumerate(script.source_dialogue):
        if line.is_no_dialogue_marker:
            ok = has_marker
        else:
            want = normalize_ws(line.text)
            ok = any(want in t for t in shot_texts)
        if not ok:
            violations.append(
                Violation(f"source_dialogue[{i}]", f"line not found in any shot: {line.text!r}")
            )
    return CheckResult.from_units("dialogue_completeness", len(script.source_dialogue), violations)


def _mentions(shot: Shot, shot_index: int, characters: Sequence[CharacterProfile]) -> dict[str, str]:
    """Character id -> path of its first reference within the shot."""
    found: dict[str, str] = {}
    for j, d in enumerate(shot.dialogue):
        if d.speaker_id is not None:
            found.setdefault(d.speaker_id, f"shots[{shot_index}].dialogue[{j}].speaker")
    for cid in shot.character_positions:
        found.setdefault(cid, f"shots[{shot_index}].positions.{cid}")
    toks = tokenize(shot.description)
    for c in characters:
        for label in (c.name, c.id):
            phrase = tokenize(label)
            n = len(phrase)
            if n and any(toks[k:k + n] == phrase for k in range(len(toks) - n + 1)):
                found.setdefault(c.id, f"shots[{shot_index}].description")
                break
    return found


def _contradictions(
    cid: str,
    mentioned: Iterable[str],
    desc_pairs: set[tuple[str, str, str]],
    appearance_pairs: Mapping[str, set[tuple[str, str, str]]],
) -> list[str]:
    mine = appearance_pairs[cid]
    others = [appearance_pairs[x] for x in mentioned if x != cid and x in appearance_pairs]
    out = []
    for attr, mod, head in sorted(desc_pairs):
        if (attr, mod, head) in mine:
            continue
        stated = sorted(m for a, m, h in mine if a == attr and h == head)
        if not stated:
            continue
        # another mentioned character may plausibly own the phrase
        explained = any(
            (attr, mod, head) in p or not any(a == attr and h == head for a, _, h in p)
            for p in others
        )
        if not explained:
            out.append(f"'{mod} {head}' contradicts '{stated[0]} {head}'")
    return out


def check_character_consistency(script: CinematicScript, lexicon: Lexicon | None = None) -> CheckResult:
    lexicon = lexicon or default_lexicon()
    declared = {c.id: c for c in script.characters}
    appearance_pairs = {cid: lexicon.attribute_pairs(c.appearance) for cid, c in declared.items()}
    units = 0
    violations = []
    for i, shot in enumerate(script.shots):
        mentions = _mentions(shot, i, script.characters)
        desc_pairs = lexicon.attribute_pairs(shot.description)
        for cid, where in mentions.items():
            units += 1
            if cid not in declared:
                violations.append(Violation(where, f"undeclared character {cid!r}"))
                continue
            found = _contradictions(cid, mentions, desc_pairs, appearance_pairs)
            if found:
                violations.append(
                    Violation(
                        f"shots[{i}].description",
                        f"appearance of {cid!r}: " + "; ".join(found),
                    )
                )
    return CheckResult.from_units("character_consistency", units, violations)


def shot_locations(script: CinematicScript, lexicon: Lexicon | None = None) -> list[frozenset[str]]:
    """Location tokens per shot; shots naming no location inherit the previous one."""
    lexicon = lexicon or default_lexicon()
    current = lexicon.locations(script.scene_setting)
    out = []
    for shot in script.shots:
        named = lexicon.locations(shot.description)
        if named:
            current = named
        out.append(current)
    return out


def check_scene_coherence(script: CinematicScript, lexicon: Lexicon | None = None) -> CheckResult:
    locs = shot_locations(script, lexicon)
    violations = []
    for i in range(len(script.shots) - 1):
        a, b = locs[i], locs[i + 1]
        changed = bool(a) and bool(b) and a.isdisjoint(b)
        flagged = script.shots[i].is_semantic_breakpoint or script.shots[i + 1].is_semantic_breakpoint
        if changed and not flagged:
            violations.append(
                Violation(
                    f"shots[{i + 1}]",
                    f"location changes from {sorted(a)} to {sorted(b)} without a semantic breakpoint",
                )
            )
    return CheckResult.from_units("scene_coherence", max(len(script.shots) - 1, 0), violations)


def check_physical_rationality(script: CinematicScript, max_speed: float = DEFAULT_MAX_SPEED) -> CheckResult:
    if not max_speed > 0:
        raise InvalidConfig(f"max_speed must be positive, got {max_speed!r}")
    units = 0
    violations = []
    for i in range(len(script.shots) - 1):
        prev, nxt = script.shots[i], script.shots[i + 1]
        elapsed = nxt.interval.start_s - prev.interval.end_s
        for cid, (x0, y0) in prev.character_positions.items():
            if cid not in nxt.character_positions:
                continue
            units += 1
            x1, y1 = nxt.character_positions[cid]
            dist = math.hypot(x1 - x0, y1 - y0)
            if dist == 0:
                continue
            if elapsed <= 0:
                violations.append(
                    Violation(
                        f"shots[{i + 1}].positions.{cid}",
                        f"{cid!r} moves {dist:g} units with no elapsed time",
                    )
                )
            elif dist / elapsed > max_speed:
                violations.append(
                    Violation(
                        f"shots[{i + 1}].positions.{cid}",
                        f"{cid!r} moves {dist:g} units in {elapsed:g} s "
                        f"({dist / elapsed:g} > {max_speed:g} units/s)",
                    )
                )
    return CheckResult.from_units("physical_rationality", units, violations)


def run_verification(script: CinematicScript, config: VerifyConfig | None = None) -> VerificationReport:
    config = config or VerifyConfig()
    lexicon = config.resolved_lexicon()
    return VerificationReport(
        (
            check_dialogue_completeness(script),
            check_character_consistency(script, lexicon),
            check_scene_coherence(script, lexicon),
            check_physical_rationality(script, config.max_speed),
        )
    )


# --------------------------------------------------------------------------
# correction loop


@dataclass(frozen=True)
class ScriptContext:
    """What the generator is given: the coarse input it must expand."""

    source_dialogue: tuple[DialogueLine, ...]
    characters: tuple[CharacterProfile, ...]
    scene_setting: str

    @classmethod
    def from_script(cls, script: CinematicScript) -> "ScriptContext":
        return cls(script.source_dialogue, script.characters, script.scene_setting)

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "ScriptContext":
        shell = script_from_dict({**doc, "shots": []}, max_shot_seconds=None)
        return cls.from_script(shell)

    def to_dict(self) -> dict:
        doc = script_to_dict(
            CinematicScript((), self.characters, self.scene_setting, self.source_dialogue)
        )
        del doc["shots"]
        return doc


class GeneratorClient(Protocol):
    def generate(self, context: dict, feedback: list[dict], round: int) -> str: ...


@dataclass(frozen=True)
class CorrectionConfig:
    max_rounds: int = DEFAULT_MAX_ROUNDS
    keep_best: bool = True
    verify: VerifyConfig = field(default_factory=VerifyConfig)
    max_shot_seconds: float | None = 10.0


@dataclass(frozen=True)
class RoundRecord:
    round: int
    score: float
    best_score: float
    error: str | None = None

    def to_dict(self) -> dict:
        return {"round": self.round, "score": self.score, "best_score": self.best_score, "error": self.error}


@dataclass(frozen=True)
class CorrectionOutcome:
    final_script: CinematicScript | None
    final_report: VerificationReport | None
    rounds_used: int
    round_history: tuple[RoundRecord, ...]

    @property
    def converged(self) -> bool:
        return self.final_report is not None and self.final_report.all_pass

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "rounds_used": self.rounds_used,
            "round_history": [r.to_dict() for r in self.round_history],
            "final_report": self.final_report.to_dict() if self.final_report else None,
            "final_script": script_to_dict(self.final_script) if self.final_script else None,
        }


def feedback_items(report: VerificationReport) -> list[dict]:
    return [v.to_dict() for v in report.violations]


def correction_loop(
    context: ScriptContext,
    generator: GeneratorClient,
    config: CorrectionConfig | None = None,
    *,
    on_round: Callable[[RoundRecord], None] | None = None,
) -> CorrectionOutcome:
    """Ask the generator for drafts until every check passes or rounds run out.

    A draft that does not parse consumes its round and scores 0.  With
    ``keep_best`` the returned script is the highest-scoring draft seen
    (earliest wins ties); otherwise it is the last parseable one.
    """
    config = config or CorrectionConfig()
    if config.max_rounds < 1:
        raise InvalidConfig(f"max_rounds must be >= 1, got {config.max_rounds}")
    ctx = context.to_dict()
    feedback: list[dict] = []
    history: list[RoundRecord] = []
    best: tuple[float, CinematicScript, VerificationReport] | None = None
    last: tuple[CinematicScript, VerificationReport] | None = None

    for rnd in range(1, config.max_rounds + 1):
        try:
            document = generator.generate(ctx, feedback, rnd)
        except ServiceError as exc:
            raise GeneratorError(str(exc), round_index=rnd, attempts=exc.attempts) from exc
        error = None
        try:
            draft = parse_script(document, max_shot_seconds=config.max_shot_seconds)
        except CineError as exc:
            score = 0.0
            error = f"{exc.kind}: {exc}"
            feedback = [{"location": "$", "message": f"draft rejected: {exc}"}]
            log.info("round %d: malformed draft (%s)", rnd, exc)
        else:
            report = run_verification(draft, config.verify)
            score = report.mean_pass_fraction
            feedback = feedback_items(report)
            last = (draft, report)
            if best is None or score > best[0]:
                best = (score, draft, report)
        best_score = best[0] if best else 0.0
        record = RoundRecord(rnd, score, best_score, error)
        history.append(record)
        if on_round:
            on_round(record)
        if error is None and report.all_pass:
            break

    chosen = (best[1], best[2]) if (config.keep_best and best) else last
    return CorrectionOutcome(
        final_script=chosen[0] if chosen else None,
        final_report=chosen[1] if chosen else None,
        rounds_used=len(history),
        round_history=tuple(history),
    )

"""Shot-level cinematic script: types, JSON document parsing and validation.

The document format is a single JSON object::

    {
      "scene_setting": "...",
      "characters": [{"id", "name", "appearance", "initial_position": [x, y]}],
      "source_dialogue": [{"speaker", "text"}],
      "shots": [{"id", "start", "end", "shot_type", "camera_movement",
                 "fixed_camera", "description", "dialogue", "positions",
                 "semantic_breakpoint"}]
    }

``start``/``end`` are decimal seconds or ``"HH:MM:SS[.fff]"`` strings; a shot
may instead carry ``"timestamp": "[00:00:00~00:00:08]"``.  Keys this module
does not know about are kept on the owning object and written back out.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .errors import InvariantError, SchemaError, ScriptSyntaxError, UnknownShot

NO_DIALOGUE = "[No Dialogue]"
DEFAULT_MAX_SHOT_SECONDS = 10.0

SHOT_TYPES = ("wide", "medium", "close_up", "panoramic")
CAMERA_MOVEMENTS = ("static", "pan", "tilt", "track", "zoom", "handheld", "crane")

Point = tuple[float, float]


@dataclass(frozen=True)
class TimeInterval:
    """Half-open interval ``[start_s, end_s)`` in seconds."""

    start_s: float
    end_s: float

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    def __contains__(self, t: float) -> bool:
        return self.start_s <= t < self.end_s


@dataclass(frozen=True)
class CameraSpec:
    # None marks a field absent from a programmatically built script.
    shot_type: str | None
    movement: str | None
    is_fixed_position: bool | None
    notes: str = ""

    def render(self) -> str:
        fixed = "fixed" if self.is_fixed_position else "moving"
        return f"{self.shot_type} | {self.movement} | {fixed}"


@dataclass(frozen=True)
class CharacterProfile:
    id: str
    name: str
    appearance: str
    initial_position: Point | None
    extra: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class DialogueLine:
    speaker_id: str | None
    text: str
    extra: Mapping[str, Any] = field(default_factory=dict)

    @property
    def is_no_dialogue_marker(self) -> bool:
        return self.text == NO_DIALOGUE


@dataclass(frozen=True)
class Shot:
    id: str
    interval: TimeInterval
    camera: CameraSpec
    description: str
    dialogue: tuple[DialogueLine, ...] = ()
    character_positions: Mapping[str, Point] = field(default_factory=dict)
    is_semantic_breakpoint: bool = False
    extra: Mapping[str, Any] = field(default_factory=dict)

    @property
    def duration_s(self) -> float:
        return self.interval.duration_s


@dataclass(frozen=True)
class CinematicScript:
    shots: tuple[Shot, ...]
    characters: tuple[CharacterProfile, ...]
    scene_setting: str
    source_dialogue: tuple[DialogueLine, ...] = ()
    extra: Mapping[str, Any] = field(default_factory=dict)

    def shot(self, shot_id: str) -> Shot:
        for s in self.shots:
            if s.id == shot_id:
                return s
        raise UnknownShot(shot_id)

    @property
    def character_ids(self) -> set[str]:
        return {c.id for c in self.characters}

    @property
    def total_span_s(self) -> float:
        if not self.shots:
            return 0.0
        return self.shots[-1].interval.end_s - self.shots[0].interval.start_s


@dataclass(frozen=True)
class FormatReport:
    missing_fields: tuple[str, ...] = ()
    malformed_entries: tuple[tuple[str, str], ...] = ()
    total_fields: int = 0

    @property
    def is_valid(self) -> bool:
        return not self.missing_fields and not self.malformed_entries

    @property
    def intact_fraction(self) -> float:
        """Share of checked fields with no missing/malformed finding."""
        if self.total_fields == 0:
            return 1.0 if self.is_valid else 0.0
        bad = set(self.missing_fields) | {p for p, _ in self.malformed_entries}
        return max(0.0, 1.0 - len(bad) / self.total_fields)

    def to_dict(self) -> dict:
        return {
            "is_valid": self.is_valid,
            "missing_fields": list(self.missing_fields),
            "malformed_entries": [list(e) for e in self.malformed_entries],
            "total_fields": self.total_fields,
            "intact_fraction": self.intact_fraction,
        }


# --------------------------------------------------------------------------
# timestamps

_HMS_RE = re.compile(r"^\s*(\d+):([0-5]?\d):([0-5]?\d(?:\.\d+)?)\s*$")
_RANGE_RE = re.compile(r"^\s*\[?\s*([^~\]]+?)\s*~\s*([^~\]]+?)\s*\]?\s*$")


def parse_timestamp(value: Any, path: str) -> float:
    """Decimal seconds or ``HH:MM:SS[.fff]`` to float seconds."""
    if isinstance(value, bool):
        raise SchemaError(path, "expected seconds or HH:MM:SS, got boolean")
    if isinstance(value, (int, float)):
        if not math.isfinite(value):
            raise SchemaError(path, "timestamp must be finite")
        return float(value)
    if isinstance(value, str):
        m = _HMS_RE.match(value)
        if m:
            h, mnt, s = m.groups()
            return int(h) * 3600 + int(mnt) * 60 + float(s)
        try:
            x = float(value)
        except ValueError:
            pass
        else:
            if math.isfinite(x):
                return x
    raise SchemaError(path, f"unrecognised timestamp {value!r}")


def format_timestamp(seconds: float) -> str:
    """Render seconds in the ``HH:MM:SS`` display style (fraction kept if any)."""
    whole = int(seconds)
    frac = seconds - whole
    h, rem = divmod(whole, 3600)
    m, s = divmod(rem, 60)
    out = f"{h:02d}:{m:02d}:{s:02d}"
    if frac > 1e-9:
        out += f"{frac:.3f}".lstrip("0").rstrip("0")
    return out


# --------------------------------------------------------------------------
# parsing

_SCRIPT_KEYS = ("scene_setting", "characters", "source_dialogue", "shots")
_CHARACTER_KEYS = ("id", "name", "appearance", "initial_position")
_LINE_KEYS = ("speaker", "text")
_SHOT_KEYS = (
    "id", "start", "end", "timestamp", "shot_type", "camera_movement", "fixed_camera",
    "camera_notes", "description", "dialogue", "positions", "semantic_breakpoint",
)


def _require(obj: Mapping, key: str, path: str) -> Any:
    if key not in obj:
        raise SchemaError(f"{path}.{key}" if path else key, "missing")
    return obj[key]


def _expect(value: Any, kind: type | tuple, path: str, what: str) -> Any:
    # bool is an int subclass; only accept it where bool is asked for
    if not isinstance(value, kind) or (isinstance(value, bool) and kind is not bool):
        raise SchemaError(path, f"expected {what}")
    return value


def _point(value: Any, path: str) -> Point:
    _expect(value, list, path, "[x, y]")
    if len(value) != 2:
        raise SchemaError(path, "expected [x, y]")
    xs = []
    for i, v in enumerate(value):
        _expect(v, (int, float), f"{path}[{i}]", "number")
        xs.append(float(v))
    return (xs[0], xs[1])


def _extras(obj: Mapping, known: Iterable[str]) -> dict:
    known = set(known)
    return {k: v for k, v in obj.items() if k not in known}


def _line(obj: Any, path: str) -> DialogueLine:
    _expect(obj, dict, path, "object")
    speaker = obj.get("speaker")
    if speaker is not None:
        _expect(speaker, str, f"{path}.speaker", "string or null")
    text = _expect(_require(obj, "text", path), str, f"{path}.text", "string")
    return DialogueLine(speaker, text, _extras(obj, _LINE_KEYS))


def _character(obj: Any, path: str) -> CharacterProfile:
    _expect(obj, dict, path, "object")
    return CharacterProfile(
        id=_expect(_require(obj, "id", path), str, f"{path}.id", "string"),
        name=_expect(_require(obj, "name", path), str, f"{path}.name", "string"),
        appearance=_expect(_require(obj, "appearance", path), str, f"{path}.appearance", "string"),
        initial_position=_point(_require(obj, "initial_position", path), f"{path}.initial_position"),
        extra=_extras(obj, _CHARACTER_KEYS),
    )


def _interval(obj: Mapping, path: str) -> TimeInterval:
    if "start" in obj or "end" in obj or "timestamp" not in obj:
        start = parse_timestamp(_require(obj, "start", path), f"{path}.start")
        end = parse_timestamp(_require(obj, "end", path), f"{path}.end")
        return TimeInterval(start, end)
    stamp = _expect(obj["timestamp"], str, f"{path}.timestamp", "string")
    m = _RANGE_RE.match(stamp)
    if not m:
        raise SchemaError(f"{path}.timestamp", f"unrecognised range {stamp!r}")
    return TimeInterval(
        parse_timestamp(m.group(1), f"{path}.timestamp"),
        parse_timestamp(m.group(2), f"{path}.timestamp"),
    )


def _shot(obj: Any, path: str) -> Shot:
    _expect(obj, dict, path, "object")
    dialogue = obj.get("dialogue", [])
    _expect(dialogue, list, f"{path}.dialogue", "array")
    positions = obj.get("positions", {})
    _expect(positions, dict, f"{path}.positions", "object")
    breakpoint_ = obj.get("semantic_breakpoint", False)
    _expect(breakpoint_, bool, f"{path}.semantic_breakpoint", "boolean")
    camera = CameraSpec(
        shot_type=_expect(_require(obj, "shot_type", path), str, f"{path}.shot_type", "string"),
        movement=_expect(_require(obj, "camera_movement", path), str, f"{path}.camera_movement", "string"),
        is_fixed_position=_expect(_require(obj, "fixed_camera", path), bool, f"{path}.fixed_camera", "boolean"),
        notes=_expect(obj.get("camera_notes", ""), str, f"{path}.camera_notes", "string"),
    )
    return Shot(
        id=_expect(_require(obj, "id", path), str, f"{path}.id", "string"),
        interval=_interval(obj, path),
        camera=camera,
        description=_expect(_require(obj, "description", path), str, f"{path}.description", "string"),
        dialogue=tuple(_line(d, f"{path}.dialogue[{i}]") for i, d in enumerate(dialogue)),
        character_positions={
            k: _point(v, f"{path}.positions.{k}") for k, v in positions.items()
        },
        is_semantic_breakpoint=breakpoint_,
        extra=_extras(obj, _SHOT_KEYS),
    )


def script_from_dict(doc: Any, *, max_shot_seconds: float | None = DEFAULT_MAX_SHOT_SECONDS) -> CinematicScript:
    """Build a script from an already-decoded JSON object and enforce invariants."""
    script = _build(doc)
    report = validate_structure(script, max_shot_seconds=max_shot_seconds)
    if report.missing_fields:
        raise SchemaError(report.missing_fields[0], "missing")
    if report.malformed_entries:
        raise InvariantError(*report.malformed_entries[0])
    return script


def _build(doc: Any) -> CinematicScript:
    _expect(doc, dict, "$", "object")
    setting = _expect(_require(doc, "scene_setting", ""), str, "scene_setting", "string")
    chars = _expect(_require(doc, "characters", ""), list, "characters", "array")
    source = _expect(_require(doc, "source_dialogue", ""), list, "source_dialogue", "array")
    shots = _expect(_require(doc, "shots", ""), list, "shots", "array")
    return CinematicScript(
        shots=tuple(_shot(s, f"shots[{i}]") for i, s in enumerate(shots)),
        characters=tuple(_character(c, f"characters[{i}]") for i, c in enumerate(chars)),
        scene_setting=setting,
        source_dialogue=tuple(_line(d, f"source_dialogue[{i}]") for i, d in enumerate(source)),
        extra=_extras(doc, _SCRIPT_KEYS),
    )


def parse_script(text: str | bytes, *, max_shot_seconds: float | None = DEFAULT_MAX_SHOT_SECONDS) -> CinematicScript:
    """Parse a script document.

    Raises ScriptSyntaxError for undecodable JSON, SchemaError for missing or
    wrongly-typed fields and InvariantError for the first broken invariant.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScriptSyntaxError(f"not valid JSON: {exc}") from exc
    return script_from_dict(doc, max_shot_seconds=max_shot_seconds)


def inspect_script(
    text: str | bytes, *, max_shot_seconds: float | None = DEFAULT_MAX_SHOT_SECONDS
) -> tuple[CinematicScript | None, FormatReport]:
    """Non-raising variant of ``parse_script``.

    Returns the script (None when it cannot be built at all) and its format
    report.  A document that fails decoding or typing scores zero intact
    fields; one that only breaks invariants gets the full field count.
    """
    try:
        doc = json.loads(text)
        script = _build(doc)
    except json.JSONDecodeError as exc:
        return None, FormatReport(malformed_entries=(("$", f"not valid JSON: {exc}"),))
    except SchemaError as exc:
        if exc.reason == "missing":
            return None, FormatReport(missing_fields=(exc.path,))
        return None, FormatReport(malformed_entries=((exc.path, exc.reason),))
    return script, validate_structure(script, max_shot_seconds=max_shot_seconds)


# --------------------------------------------------------------------------
# serialization


def _line_to_dict(line: DialogueLine) -> dict:
    return {"speaker": line.speaker_id, "text": line.text, **line.extra}


def _shot_to_dict(shot: Shot) -> dict:
    out: dict[str, Any] = {
        "id": shot.id,
        "start": shot.interval.start_s,
        "end": shot.interval.end_s,
        "shot_type": shot.camera.shot_type,
        "camera_movement": shot.camera.movement,
        "fixed_camera": shot.camera.is_fixed_position,
    }
    if shot.camera.notes:
        out["camera_notes"] = shot.camera.notes
    out["description"] = shot.description
    out["dialogue"] = [_line_to_dict(d) for d in shot.dialogue]
    out["positions"] = {k: list(v) for k, v in shot.character_positions.items()}
    out["semantic_breakpoint"] = shot.is_semantic_breakpoint
    out.update(shot.extra)
    return out


def script_to_dict(script: CinematicScript) -> dict:
    return {
        "scene_setting": script.scene_setting,
        "characters": [
            {
                "id": c.id,
                "name": c.name,
                "appearance": c.appearance,
                "initial_position": list(c.initial_position) if c.initial_position is not None else None,
                **c.extra,
            }
            for c in script.characters
        ],
        "source_dialogue": [_line_to_dict(d) for d in script.source_dialogue],
        "shots": [_shot_to_dict(s) for s in script.shots],
        **script.extra,
    }


def serialize_script(script: CinematicScript) -> str:
    return json.dumps(script_to_dict(script), indent=2, ensure_ascii=False) + "\n"


# --------------------------------------------------------------------------
# structural validation


def validate_structure(
    script: CinematicScript, *, max_shot_seconds: float | None = DEFAULT_MAX_SHOT_SECONDS
) -> FormatReport:
    """Check required fields and every type invariant; never raises."""
    missing: list[str] = []
    malformed: list[tuple[str, str]] = []
    checked: set[str] = set()

    def need_text(path: str, value: str | None) -> None:
        checked.add(path)
        if value is None:
            missing.append(path)
        elif not value.strip():
            malformed.append((path, "empty"))

    need_text("scene_setting", script.scene_setting)

    seen_ids: set[str] = set()
    for i, c in enumerate(script.characters):
        p = f"characters[{i}]"
        need_text(f"{p}.id", c.id)
        need_text(f"{p}.name", c.name)
        need_text(f"{p}.appearance", c.appearance)
        checked.add(f"{p}.initial_position")
        if c.initial_position is None:
            missing.append(f"{p}.initial_position")
        if c.id is not None:
            if c.id in seen_ids:
                malformed.append((f"{p}.id", f"duplicate character id {c.id!r}"))
            seen_ids.add(c.id)

    def check_line(path: str, line: DialogueLine, speaker_scope: set[str] | None) -> None:
        need_text(f"{path}.text", line.text)
        if line.speaker_id is not None and speaker_scope is not None:
            checked.add(f"{path}.speaker")
            if line.speaker_id not in speaker_scope:
                malformed.append((f"{path}.speaker", f"undeclared character {line.speaker_id!r}"))

    for i, line in enumerate(script.source_dialogue):
        check_line(f"source_dialogue[{i}]", line, None)

    prev_end: float | None = None
    for i, shot in enumerate(script.shots):
        p = f"shots[{i}]"
        need_text(f"{p}.id", shot.id)
        checked.update((f"{p}.start", f"{p}.end"))
        iv = shot.interval
        if iv is None:
            missing.extend((f"{p}.start", f"{p}.end"))
        else:
            if iv.start_s is None:
                missing.append(f"{p}.start")
            if iv.end_s is None:
                missing.append(f"{p}.end")
            if iv.start_s is not None and iv.end_s is not None:
                if iv.start_s < 0:
                    malformed.append((f"{p}.start", "negative start"))
                if iv.end_s <= iv.start_s:
                    malformed.append((f"{p}.end", "end must be after start"))
                elif max_shot_seconds is not None and iv.duration_s > max_shot_seconds:
                    malformed.append(
                        (f"{p}.end", f"duration {iv.duration_s:g} s exceeds {max_shot_seconds:g} s")
                    )
                if prev_end is not None and iv.start_s < prev_end:
                    malformed.append((f"{p}.start", "overlapping intervals"))
                prev_end = iv.end_s if prev_end is None else max(prev_end, iv.end_s)

        cam = shot.camera
        for name, value in (
            ("shot_type", cam.shot_type if cam else None),
            ("movement", cam.movement if cam else None),
        ):
            need_text(f"{p}.camera.{name}", value)
        checked.add(f"{p}.camera.is_fixed_position")
        if cam is None or cam.is_fixed_position is None:
            missing.append(f"{p}.camera.is_fixed_position")
        elif cam.movement == "static" and not cam.is_fixed_position:
            malformed.append((f"{p}.camera.is_fixed_position", "static camera must be fixed"))

        need_text(f"{p}.description", shot.description)
        for j, line in enumerate(shot.dialogue):
            check_line(f"{p}.dialogue[{j}]", line, seen_ids)
        for cid, pos in shot.character_positions.items():
            checked.add(f"{p}.positions.{cid}")
            if pos is None or len(pos) != 2 or not all(math.isfinite(v) for v in pos):
                malformed.append((f"{p}.positions.{cid}", "expected finite [x, y]"))

    return FormatReport(tuple(missing), tuple(malformed), len(checked))

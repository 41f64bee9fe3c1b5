"""Exception hierarchy shared by every module.

Each error that the command line surfaces carries a short ``kind`` used in the
machine-readable error payload.
"""

from __future__ import annotations


class CineError(Exception):
    kind = "error"

    def to_dict(self) -> dict:
        return {"error": self.kind, "message": str(self)}


# --- script IR -------------------------------------------------------------


class ScriptSyntaxError(CineError):
    """The document is not parseable JSON."""

    kind = "syntax_error"


class SchemaError(CineError):
    kind = "schema_error"

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason

    def to_dict(self) -> dict:
        return {"error": self.kind, "message": str(self), "path": self.path}


class InvariantError(CineError):
    kind = "invariant_error"

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason

    def to_dict(self) -> dict:
        return {"error": self.kind, "message": str(self), "path": self.path}


class InvalidConfig(CineError, ValueError):
    kind = "invalid_config"


class RangeError(CineError, ValueError):
    kind = "range_error"


# --- planner ---------------------------------------------------------------


class UnplannableShot(CineError):
    kind = "unplannable_shot"

    def __init__(self, shot_id: str, duration_s: float, effective_window_s: float):
        super().__init__(
            f"shot {shot_id!r} lasts {duration_s:g} s, longer than the "
            f"effective window of {effective_window_s:g} s"
        )
        self.shot_id = shot_id


class UnknownShot(CineError, KeyError):
    kind = "unknown_shot"

    def __str__(self) -> str:
        return f"unknown shot id {self.args[0]!r}"


# --- reward ----------------------------------------------------------------


class DegenerateGroup(CineError, ValueError):
    kind = "degenerate_group"


class LengthMismatch(CineError, ValueError):
    kind = "length_mismatch"


# --- services --------------------------------------------------------------


class ServiceError(CineError):
    """A remote call failed after the retry budget was spent."""

    kind = "service_error"

    def __init__(self, message: str, *, attempts: int = 1, status: int | None = None):
        super().__init__(message)
        self.attempts = attempts
        self.status = status

    def to_dict(self) -> dict:
        return {**super().to_dict(), "attempts": self.attempts, "status": self.status}


class ProtocolError(ServiceError):
    """The service answered, but not in the agreed wire format."""

    kind = "protocol_error"


class GeneratorError(ServiceError):
    kind = "generator_error"

    def __init__(self, message: str, *, round_index: int, attempts: int = 1):
        super().__init__(f"round {round_index}: {message}", attempts=attempts)
        self.round_index = round_index

    def to_dict(self) -> dict:
        return {**super().to_dict(), "round": self.round_index}

class MediaError(ServiceError):
    kind = "media_error"

class VideoGenError(ServiceError):
    """Raised when a scene cannot be generated; ``partial`` holds finished work."""

    kind = "videogen_error"

    def __init__(self, message: str, *, scene_index: int, partial=None, attempts: int = 1):
        super().__init__(f"scene {scene_index + 1} (index {scene_index}): {message}", attempts=attempts)
        self.scene_index = scene_index
        self.partial = partial

    def to_dict(self) -> dict:
        return {**super().to_dict(), "scene_index": self.scene_index}

# --- metrics ---------------------------------------------------------------

class ZeroVector(CineError, ValueError):
    kind = "zero_vector"

class DimMismatch(CineError, ValueError):
    kind = "dim_mismatch"

class MissingInstruction(CineError, KeyError):
    kind = "missing_instruction"

    def __str__(self) -> str:
        return f"no instruction embedding for shot {self.args[0]!r}"

class NoFramesInIntervals(CineError, ValueError):
    kind = "no_frames_in_intervals"

class NoFrames(CineError, ValueError):
    kind = "no_frames"

# --- critic ----------------------------------------------------------------

class MissingSlot(CineError, KeyError):
    kind = "missing_slot"

    def __str__(self) -> str:
        return f"missing prompt slot {self.args[0]!r}"

class ScorecardError(CineError, ValueError):
    kind = "scorecard_error"

class NoJsonFound(ScorecardError):
    kind = "no_json_found"

class UnknownDimension(ScorecardError):
    kind = "unknown_dimension"

class MissingDimension(ScorecardError):
    kind = "missing_dimension"

class ScoreOutOfRange(ScorecardError):
    kind = "score_out_of_range"

class NonIntegerScore(ScorecardError):
    kind = "non_integer_score"

class EmptyInput(CineError, ValueError):
    kind = "empty_input"

class MixedRubrics(CineError, ValueError):
    kind = "mixed_rubrics"

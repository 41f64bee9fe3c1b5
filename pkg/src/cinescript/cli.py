"""Command-line front end.

Every subcommand prints one JSON document on stdout (or to ``--out``).
Failures print a JSON error object on stderr and exit with

    1  validation failure (bad script, failing checks, unplannable shot, ...)
    2  service or protocol error
    3  usage or configuration error
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime as dt
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from . import critic
from .director import execute_plan
from .errors import CineError, InvalidConfig, MissingSlot, ServiceError
from .metrics import load_embeddings, vsa
from .mock import MockServices
from .planner import ScenePlan, segment_scenes
from .reward import group_advantages, reward_breakdown
from .script_ir import inspect_script, parse_script
from .services import (
    HttpGenerator,
    JsonServiceClient,
    LlmClient,
    MediaClient,
    PreferenceScorer,
    RetryPolicy,
    VideoGenClient,
)
from .verify import CorrectionConfig, Lexicon, ScriptContext, VerifyConfig, correction_loop, run_verification

log = logging.getLogger("cinescript")

EXIT_OK, EXIT_INVALID, EXIT_SERVICE, EXIT_USAGE = 0, 1, 2, 3

ENDPOINT_ROLES = ("generator", "preference", "videogen", "media", "embed", "judge")
MOCK_BASE_URL = "http://mock.invalid"


class UsageError(CineError):
    kind = "usage_error"


@dataclass(frozen=True)
class PipelineConfig:
    alpha: float = 0.4
    beta: float = 0.04
    group_size: int = 8
    epsilon: float = 1e-8
    max_shot_seconds: float = 10.0
    window_s: float | None = None
    max_rounds: int = 5
    keep_best: bool = True
    max_speed: float = 5.0
    lexicon: str | None = None
    endpoints: dict = field(default_factory=dict)
    video_rubric: str = "video_eval"
    judge_retries: int = 2
    max_in_flight: int = 4
    retry_attempts: int = 3
    retry_base_delay: float = 1.0
    retry_factor: float = 2.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidConfig(f"alpha must lie in [0, 1], got {self.alpha!r}")
        if not self.epsilon > 0:
            raise InvalidConfig(f"epsilon must be positive, got {self.epsilon!r}")
        if self.group_size < 2:
            raise InvalidConfig(f"group_size must be >= 2, got {self.group_size!r}")
        if self.max_rounds < 1:
            raise InvalidConfig(f"max_rounds must be >= 1, got {self.max_rounds!r}")
        if self.window_s is not None and not self.window_s > 0:
            raise InvalidConfig(f"window_s must be positive, got {self.window_s!r}")
        if self.judge_retries < 0 or self.retry_attempts < 1 or self.max_in_flight < 1:
            raise InvalidConfig("retry counts and max_in_flight must be positive")
        unknown = set(self.endpoints) - set(ENDPOINT_ROLES)
        if unknown:
            raise InvalidConfig(f"unknown endpoint role(s) {sorted(unknown)}")
        if self.video_rubric not in ("video_eval", "video_cinematic"):
            raise InvalidConfig(f"video_rubric must be video_eval or video_cinematic, got {self.video_rubric!r}")

    @classmethod
    def from_dict(cls, doc: dict) -> "PipelineConfig":
        if not isinstance(doc, dict):
            raise InvalidConfig("config must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(doc) - names)
        if unknown:
            raise InvalidConfig(f"unknown config key(s) {unknown}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise InvalidConfig(str(exc)) from exc

    @property
    def retry(self) -> RetryPolicy:
        return RetryPolicy(self.retry_attempts, self.retry_base_delay, self.retry_factor)

    def verify_config(self) -> VerifyConfig:
        lex = None
        if self.lexicon:
            try:
                lex = Lexicon.load(self.lexicon)
            except (OSError, ValueError, KeyError) as exc:
                raise InvalidConfig(f"cannot load lexicon {self.lexicon}: {exc}") from exc
        return VerifyConfig(max_speed=self.max_speed, lexicon=lex)


# flag dest -> config field
_FLAG_FIELDS = {
    "alpha": "alpha",
    "beta": "beta",
    "epsilon": "epsilon",
    "window": "window_s",
    "max_rounds": "max_rounds",
    "max_speed": "max_speed",
    "max_shot_seconds": "max_shot_seconds",
    "retries": "judge_retries",
}


def load_config(args: argparse.Namespace) -> PipelineConfig:
    path = getattr(args, "config", None) or os.environ.get("CINE_CONFIG")
    doc: dict[str, Any] = {}
    if path:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise InvalidConfig("config must be a JSON object")
    doc = dict(doc)
    for dest, name in _FLAG_FIELDS.items():
        value = getattr(args, dest, None)
        if value is not None:
            doc[name] = value
    if getattr(args, "preference_endpoint", None):
        doc["endpoints"] = {**doc.get("endpoints", {}), "preference": args.preference_endpoint}
    return PipelineConfig.from_dict(doc)


class Services:
    """Builds service clients, pointing them at in-process mocks when asked."""

    def __init__(self, config: PipelineConfig, mock: MockServices | None = None):
        self.config = config
        self.mock = mock

    def client(self, cls: type[JsonServiceClient], role: str, **kw) -> Any:
        if self.mock is not None and role not in self.config.endpoints:
            return cls(MOCK_BASE_URL, transport=self.mock.transport(), retry=self.config.retry, **kw)
        url = self.config.endpoints.get(role)
        if not url:
            raise InvalidConfig(f"no endpoint configured for {role!r} (set endpoints.{role} or use --mock-services)")
        return cls(url, retry=self.config.retry, **kw)


# --------------------------------------------------------------------------
# helpers


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _read_json(path: str) -> Any:
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _clock(args: argparse.Namespace) -> str:
    seeded = getattr(args, "seed_clock", None)
    if seeded:
        return seeded
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")


def _emit(args: argparse.Namespace, result: Any) -> None:
    doc = {"command": args.command, "generated_at": _clock(args), "result": result}
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(_dumps(doc), encoding="utf-8")
    else:
        sys.stdout.write(_dumps(doc))


def _fail(error: dict, code: int) -> int:
    sys.stderr.write(json.dumps(error, ensure_ascii=False) + "\n")
    return code


def _exit_code(exc: CineError) -> int:
    if isinstance(exc, ServiceError):
        return EXIT_SERVICE
    if isinstance(exc, (InvalidConfig, UsageError, MissingSlot)):
        return EXIT_USAGE
    return EXIT_INVALID


# --------------------------------------------------------------------------
# subcommands


def cmd_validate(args, cfg: PipelineConfig, services: Services) -> int:
    script, fmt = inspect_script(_read_text(args.script), max_shot_seconds=cfg.max_shot_seconds)
    report = run_verification(script, cfg.verify_config()) if script is not None else None
    ok = fmt.is_valid and report is not None and report.all_pass
    _emit(args, {"ok": ok, "format": fmt.to_dict(), "verification": report.to_dict() if report else None})
    return EXIT_OK if ok else EXIT_INVALID


def cmd_correct(args, cfg: PipelineConfig, services: Services) -> int:
    doc = _read_json(args.context)
    if not isinstance(doc, dict):
        raise UsageError("context must be a JSON object")
    context = ScriptContext.from_dict(doc)
    config = CorrectionConfig(
        max_rounds=cfg.max_rounds,
        keep_best=cfg.keep_best,
        verify=cfg.verify_config(),
        max_shot_seconds=cfg.max_shot_seconds,
    )
    with services.client(HttpGenerator, "generator") as generator:
        outcome = correction_loop(context, generator, config)
    _emit(args, outcome.to_dict())
    return EXIT_OK if outcome.converged else EXIT_INVALID


def cmd_plan(args, cfg: PipelineConfig, services: Services) -> int:
    if cfg.window_s is None:
        raise UsageError("a generation window is required (--window or window_s in the config)")
    script = parse_script(_read_text(args.script), max_shot_seconds=cfg.max_shot_seconds)
    _emit(args, segment_scenes(script, cfg.window_s).to_dict())
    return EXIT_OK


def cmd_direct(args, cfg: PipelineConfig, services: Services) -> int:
    if args.transcript and services.mock is None:
        raise UsageError("--transcript is only available with --mock-services")
    script = parse_script(_read_text(args.script), max_shot_seconds=cfg.max_shot_seconds)
    try:
        plan = ScenePlan.from_dict(_read_json(args.plan))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed plan {args.plan}: {exc}") from exc
    with services.client(VideoGenClient, "videogen") as video, services.client(MediaClient, "media") as media:
        try:
            film = execute_plan(script, plan, video, media)
        finally:
            if args.transcript:
                services.mock.dump_transcript(args.transcript)
    result = film.to_dict()
    if args.transcript:
        result["transcript"] = str(args.transcript)
    _emit(args, result)
    return EXIT_OK


def cmd_reward(args, cfg: PipelineConfig, services: Services) -> int:
    if args.group is not None:
        if args.script or args.human_score is not None:
            raise UsageError("--group cannot be combined with a script or --human-score")
        try:
            rewards = [float(x) for x in args.group.split(",") if x.strip()]
        except ValueError as exc:
            raise UsageError(f"--group expects comma-separated numbers: {exc}") from exc
        _emit(args, group_advantages(rewards, cfg.epsilon).to_dict())
        return EXIT_OK
    if not args.script:
        raise UsageError("reward needs a script or --group")
    text = _read_text(args.script)
    script, fmt = inspect_script(text, max_shot_seconds=cfg.max_shot_seconds)
    if script is None:
        parse_script(text, max_shot_seconds=cfg.max_shot_seconds)  # raises the precise error
    report = run_verification(script, cfg.verify_config())
    if args.human_score is not None:
        r_human = args.human_score
    else:
        with services.client(PreferenceScorer, "preference") as scorer:
            r_human = scorer.score(text)
    _emit(args, reward_breakdown(report, fmt, r_human, cfg.alpha).to_dict())
    return EXIT_OK


def _script_slots(path: str) -> list[dict]:
    text = _read_text(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        doc = None
    if isinstance(doc, dict) and "generated_script" in doc:
        return [doc]
    if isinstance(doc, list):
        return doc
    source = ""
    if isinstance(doc, dict):
        names = {c.get("id"): c.get("name") for c in doc.get("characters", []) if isinstance(c, dict)}
        lines = []
        for line in doc.get("source_dialogue", []):
            if isinstance(line, dict):
                who = names.get(line.get("speaker")) or line.get("speaker") or "Narration"
                lines.append(f"{who}: {line.get('text', '')}")
        source = "\n".join(lines)
    return [{"source_dialogue": source, "generated_script": text}]


def _slot_maps(path: str) -> list[dict]:
    doc = _read_json(path)
    maps = doc if isinstance(doc, list) else [doc]
    if not all(isinstance(m, dict) for m in maps):
        raise UsageError(f"{path}: expected a slot object or a list of slot objects")
    return maps


def cmd_evaluate(args, cfg: PipelineConfig, services: Services) -> int:
    if args.kind == "script":
        rubric_name = args.rubric or "script_eval"
        allowed = ("script_eval",)
        items = [m for p in args.inputs for m in _script_slots(p)]
    else:
        rubric_name = args.rubric or cfg.video_rubric
        allowed = ("video_eval", "video_cinematic")
        items = [m for p in args.inputs for m in _slot_maps(p)]
    if rubric_name not in allowed:
        raise UsageError(f"rubric {rubric_name!r} does not apply to {args.kind} evaluation")
    rubric = critic.get_rubric(rubric_name)
    items = [{k: v if isinstance(v, str) else _dumps(v) for k, v in m.items()} for m in items]
    with services.client(LlmClient, "judge") as judge:
        run = critic.evaluate(items, rubric, judge, retries=cfg.judge_retries, max_in_flight=cfg.max_in_flight)
    summary = critic.aggregate(run.scorecards) if run.scorecards else None
    _emit(
        args,
        {
            "rubric": rubric.name,
            "scorecards": [dict(c.to_dict(), index=i) for i, c in zip(run.indices, run.scorecards)],
            "failed": [f.to_dict() for f in run.failed],
            "summary": summary.to_dict() if summary else None,
        },
    )
    return EXIT_SERVICE if run.failed else EXIT_OK


def cmd_vsa(args, cfg: PipelineConfig, services: Services) -> int:
    script = parse_script(_read_text(args.script), max_shot_seconds=cfg.max_shot_seconds)
    try:
        emb = load_embeddings(args.embeddings)
    except OSError as exc:
        raise UsageError(f"cannot read {args.embeddings}: {exc}") from exc
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(f"malformed embeddings file {args.embeddings}: {exc}") from exc
    _emit(args, vsa(script, emb).to_dict())
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "correct": cmd_correct,
    "plan": cmd_plan,
    "direct": cmd_direct,
    "reward": cmd_reward,
    "evaluate": cmd_evaluate,
    "vsa": cmd_vsa,
}


# --------------------------------------------------------------------------
# argument parsing


class ArgumentParser(argparse.ArgumentParser):
    """Reports usage errors as JSON on stderr with exit status 3."""

    def error(self, message):
        self.exit(EXIT_USAGE, json.dumps({"error": "usage_error", "message": message}) + "\n")


def _common() -> argparse.ArgumentParser:
    p = ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--config", help="JSON config file (default: $CINE_CONFIG)")
    p.add_argument("--mock-services", action="store_true", help="answer every service call in-process")
    p.add_argument("--seed-clock", metavar="TIMESTAMP", help="fixed value for generated_at")
    p.add_argument("--out", metavar="PATH", help="write the JSON result here instead of stdout")
    p.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return p


def build_parser() -> ArgumentParser:
    common = _common()
    parser = ArgumentParser(prog="cinescript", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    def add(name, help_text):
        return sub.add_parser(name, help=help_text, parents=[common])

    p = add("validate", "format report and the four verification checks")
    p.add_argument("script")
    p.add_argument("--max-shot-seconds", type=float)
    p.add_argument("--max-speed", type=float)

    p = add("correct", "generate a script with the verification feedback loop")
    p.add_argument("context", help="JSON with scene_setting, characters, source_dialogue")
    p.add_argument("--max-rounds", type=int)
    p.add_argument("--max-speed", type=float)

    p = add("plan", "pack shots into generation-window scenes")
    p.add_argument("script")
    p.add_argument("--window", type=float, help="generation window in seconds")

    p = add("direct", "generate every scene with last-frame anchoring")
    p.add_argument("script")
    p.add_argument("plan")
    p.add_argument("--transcript", metavar="PATH", help="write the mock service transcript (mock mode)")

    p = add("reward", "structural/hybrid reward for a script, or group advantages")
    p.add_argument("script", nargs="?")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--human-score", type=float)
    src.add_argument("--preference-endpoint", metavar="URL")
    p.add_argument("--group", metavar="R1,...,RK", help="rewards of one sampled group")
    p.add_argument("--alpha", type=float)
    p.add_argument("--epsilon", type=float)

    p = add("evaluate", "score scripts or videos with an LLM judge rubric")
    p.add_argument("kind", choices=["script", "video"])
    p.add_argument("inputs", nargs="+", help="script files (script) or slot-map JSON files (video)")
    p.add_argument("--rubric", choices=sorted(critic.RUBRICS))
    p.add_argument("--retries", type=int)

    p = add("vsa", "visual-script alignment from precomputed embeddings")
    p.add_argument("script")
    p.add_argument("embeddings", help="JSON Lines with frame and instruction records")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(args, "log_level", "WARNING"), stream=sys.stderr)
    try:
        cfg = load_config(args)
        mock = MockServices() if getattr(args, "mock_services", False) else None
        return COMMANDS[args.command](args, cfg, Services(cfg, mock))
    except CineError as exc:
        err = exc.to_dict()
        partial = getattr(exc, "partial", None)  # scene generation keeps finished clips
        if partial is not None:
            err["partial"] = partial.to_dict()
        return _fail(err, _exit_code(exc))


if __name__ == "__main__":
    sys.exit(main())

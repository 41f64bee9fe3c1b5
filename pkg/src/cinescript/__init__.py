"""Dialogue-to-film orchestration toolkit.

Script IR and verification, scene planning, reward values, continuity-anchored
scene generation, LLM-judge scoring and visual-script alignment.
"""

from __future__ import annotations

from .critic import RUBRICS, EvalSummary, Rubric, Scorecard, aggregate, evaluate, parse_scorecard, render_prompt
from .director import CONTINUITY_PREAMBLE, FilmArtifact, build_scene_prompt, execute_plan
from .metrics import EmbeddingSeries, VsaResult, clip_score, cosine_sim, vsa
from .planner import ScenePlan, segment_scenes, validate_shot_constraints
from .reward import group_advantages, grpo_objective, GrpoTerms, hybrid_reward, sft_loss, structural_reward
from .script_ir import (
    CinematicScript,
    FormatReport,
    inspect_script,
    parse_script,
    serialize_script,
    validate_structure,
)
from .verify import CorrectionConfig, ScriptContext, VerifyConfig, correction_loop, run_verification

__version__ = "0.1.0"

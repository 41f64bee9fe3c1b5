"""Reward shaping for script generation.

Values only: the structural score, the structural/preference blend, group
normalised advantages, the policy objective and the supervised loss are all
computed from scores and log-probabilities supplied by the caller.  Nothing
here samples a policy or takes a gradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import DegenerateGroup, InvalidConfig, LengthMismatch, RangeError
from .script_ir import FormatReport
from .verify import VerificationReport

DEFAULT_ALPHA = 0.4
DEFAULT_BETA = 0.04
DEFAULT_GROUP_SIZE = 8
DEFAULT_EPSILON = 1e-8

STRUCTURE_COMPONENTS = (
    "format_compliance",
    "dialogue_completeness",
    "scene_and_character_consistency",
    "physical_rationality",
)


def _in_unit(name: str, x: float) -> None:
    if not (0.0 <= x <= 1.0):
        raise RangeError(f"{name} must lie in [0, 1], got {x!r}")


def structural_reward(report: VerificationReport, fmt: FormatReport) -> tuple[float, dict[str, float]]:
    """Mean of four normalised components.

    Scene coherence and character consistency are scored separately by the
    verifier and folded into one component here by averaging.
    """
    components = {
        "format_compliance": 1.0 if fmt.is_valid else fmt.intact_fraction,
        "dialogue_completeness": report["dialogue_completeness"].pass_fraction,
        "scene_and_character_consistency": (
            report["scene_coherence"].pass_fraction + report["character_consistency"].pass_fraction
        ) / 2.0,
        "physical_rationality": report["physical_rationality"].pass_fraction,
    }
    r = math.fsum(components.values()) / len(components)
    return r, components


def hybrid_reward(r_structure: float, r_human: float, alpha: float = DEFAULT_ALPHA) -> float:
    _in_unit("r_structure", r_structure)
    _in_unit("r_human", r_human)
    _in_unit("alpha", alpha)
    total = alpha * r_structure + (1.0 - alpha) * r_human
    # rounding can step a hair outside the convex hull of the two inputs
    return min(max(total, min(r_structure, r_human)), max(r_structure, r_human))


@dataclass(frozen=True)
class RewardBreakdown:
    r_structure: float
    components: Mapping[str, float]
    r_human: float
    alpha: float
    r_total: float

    def to_dict(self) -> dict:
        return {
            "r_structure": self.r_structure,
            "components": dict(self.components),
            "r_human": self.r_human,
            "alpha": self.alpha,
            "r_total": self.r_total,
        }


def reward_breakdown(
    report: VerificationReport, fmt: FormatReport, r_human: float, alpha: float = DEFAULT_ALPHA
) -> RewardBreakdown:
    r_s, comps = structural_reward(report, fmt)
    return RewardBreakdown(r_s, comps, r_human, alpha, hybrid_reward(r_s, r_human, alpha))


@dataclass(frozen=True)
class GroupAdvantages:
    rewards: tuple[float, ...]
    mean: float
    std: float
    epsilon: float
    advantages: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "rewards": list(self.rewards),
            "mean": self.mean,
            "std": self.std,
            "epsilon": self.epsilon,
            "advantages": list(self.advantages),
        }


def group_advantages(rewards: Sequence[float], epsilon: float = DEFAULT_EPSILON) -> GroupAdvantages:
    """(r - mean) / (population std + epsilon) within one sampled group."""
    k = len(rewards)
    if k < 2:
        raise DegenerateGroup(f"need at least 2 rewards, got {k}")
    if epsilon < 0:
        raise InvalidConfig(f"epsilon must be non-negative, got {epsilon!r}")
    rs = tuple(float(r) for r in rewards)
    # a constant group must centre to exact zeros, whatever the division rounds to
    mean = rs[0] if min(rs) == max(rs) else math.fsum(rs) / k
    centred = [r - mean for r in rs]
    std = math.sqrt(math.fsum(c * c for c in centred) / k)
    denom = std + epsilon
    adv = tuple(c / denom if denom > 0 else 0.0 for c in centred)
    return GroupAdvantages(rs, mean, std, epsilon, adv)


@dataclass(frozen=True)
class GrpoTerms:
    advantages: Sequence[float]
    sequence_logprobs: Sequence[float]
    kl_estimate: float = 0.0
    beta: float = DEFAULT_BETA

    @property
    def policy_term(self) -> float:
        if len(self.advantages) != len(self.sequence_logprobs):
            raise LengthMismatch(
                f"{len(self.advantages)} advantages vs {len(self.sequence_logprobs)} log-probabilities"
            )
        if not self.advantages:
            raise LengthMismatch("empty group")
        k = len(self.advantages)
        return math.fsum(a * lp for a, lp in zip(self.advantages, self.sequence_logprobs)) / k

    @property
    def kl_penalty(self) -> float:
        return self.beta * self.kl_estimate


def grpo_objective(terms: GrpoTerms) -> float:
    """Advantage-weighted mean sequence log-likelihood minus the KL penalty.

    Sequence log-probabilities are used as given, without length
    normalisation.
    """
    if terms.kl_estimate < 0:
        raise RangeError(f"kl_estimate must be non-negative, got {terms.kl_estimate!r}")
    return terms.policy_term - terms.kl_penalty


def sft_loss(token_logprobs: Sequence[float]) -> float:
    """Negative log-likelihood of one target sequence."""
    for i, lp in enumerate(token_logprobs):
        if lp > 0 or math.isnan(lp):
            raise RangeError(f"token {i}: log-probability {lp!r} is not <= 0")
    return -math.fsum(token_logprobs)

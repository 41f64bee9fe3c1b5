"""From verification results to a policy-gradient signal.

    python3 demos/reward_walkthrough.py

Eight sampled drafts for one context are scored with the hybrid reward,
normalised within their group, and fed to the GRPO objective.
"""

from __future__ import annotations

import json
import math
import random
from pathlib import Path

from cinescript.reward import GrpoTerms, group_advantages, grpo_objective, reward_breakdown, sft_loss
from cinescript.script_ir import inspect_script
from cinescript.verify import run_verification

FIXTURE = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "three_shot.json"


def mutate(doc: dict, rng: random.Random) -> dict:
    """A draft with a few plausible mistakes."""
    doc = json.loads(json.dumps(doc))
    if rng.random() < 0.5:
        doc["shots"][rng.randrange(3)]["dialogue"] = []
    if rng.random() < 0.3:
        doc["shots"][1]["description"] = "Ben steps into the tavern."
    if rng.random() < 0.3:
        doc["shots"][2]["positions"] = {"anna": [60.0, 0.0]}
    if rng.random() < 0.2:
        del doc["shots"][0]["camera_movement"]
    return doc


def main() -> None:
    rng = random.Random(8)
    base = json.loads(FIXTURE.read_text(encoding="utf-8"))
    rewards = []
    print("draft  structure  preference  total")
    for k in range(8):
        text = json.dumps(mutate(base, rng))
        script, fmt = inspect_script(text)
        if script is None:
            total = 0.0  # unparseable drafts earn nothing
            print(f"  {k}    (rejected: {', '.join(fmt.missing_fields)})")
        else:
            b = reward_breakdown(run_verification(script), fmt, r_human=rng.uniform(0.3, 0.9), alpha=0.4)
            total = b.r_total
            print(f"  {k}    {b.r_structure:9.3f}  {b.r_human:10.3f}  {total:5.3f}")
        rewards.append(total)

    group = group_advantages(rewards)
    print(f"\ngroup mean {group.mean:.4f}, std {group.std:.4f}")
    print("advantages:", " ".join(f"{a:+.2f}" for a in group.advantages))

    logprobs = [-rng.uniform(40, 80) for _ in rewards]
    for kl in (0.0, 0.5, 1.0):
        value = grpo_objective(GrpoTerms(group.advantages, logprobs, kl_estimate=kl, beta=0.04))
        print(f"GRPO objective at KL {kl:.1f}: {value:.4f}")

    tokens = [math.log(0.25)] * 3
    print(f"\nSFT loss of three tokens at p=0.25: {sft_loss(tokens):.4f}")


if __name__ == "__main__":
    main()

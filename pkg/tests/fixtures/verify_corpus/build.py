"""Writes the hand-annotated verification corpus (one JSON file per case).

Each file holds ``script`` (a script document) and ``expected``: for every
check, the pass fraction as an exact ratio and the violation locations
(a multiset).  The annotations below were worked out by hand from the check
rules, not by running the checker.

    python3 tests/fixtures/verify_corpus/build.py
"""

from __future__ import annotations

import json
from pathlib import Path

HERE = Path(__file__).parent

ANNA = {"id": "anna", "name": "Anna", "appearance": "A tall woman in a red coat with long black hair.",
        "initial_position": [0, 0]}
BEN = {"id": "ben", "name": "Ben", "appearance": "A short man in a blue jacket and a grey coat.",
       "initial_position": [2, 0]}
CARA = {"id": "cara", "name": "Cara", "appearance": "A young woman in a green cloak and white gloves.",
        "initial_position": [4, 0]}
CHARS = [ANNA, BEN, CARA]

L1 = ("anna", "Did you bring the letter?")
L2 = ("ben", "It never arrived.")
L3 = ("anna", "Then we wait.")
L4 = ("ben", "Someone is coming.")
ND = (None, "[No Dialogue]")


def shot(i, start, end, desc, lines=(), pos=None, bp=False):
    return {
        "id": f"s{i}", "start": start, "end": end, "shot_type": "medium",
        "camera_movement": "static", "fixed_camera": True, "description": desc,
        "dialogue": [{"speaker": s, "text": t} for s, t in lines],
        "positions": pos or {}, "semantic_breakpoint": bp,
    }


def script(shots, source=(), setting="A quiet courtyard at dusk."):
    return {"scene_setting": setting, "characters": CHARS,
            "source_dialogue": [{"speaker": s, "text": t} for s, t in source], "shots": shots}


def ok(units):
    return {"pass_fraction": "1", "units": units, "violations": []}


def bad(fraction, units, *locations):
    return {"pass_fraction": fraction, "units": units, "violations": list(locations)}


def expect(dialogue, character, scene, physical):
    return {"dialogue_completeness": dialogue, "character_consistency": character,
            "scene_coherence": scene, "physical_rationality": physical}


CASES = {}

# --- dialogue completeness -------------------------------------------------

CASES["01_clean"] = (
    script([
        shot(1, 0, 4, "Anna waits in the courtyard.", [L1], {"anna": [0, 0]}),
        shot(2, 4, 8, "Ben shakes his head.", [L2], {"ben": [2, 0]}),
        shot(3, 8, 12, "Anna turns away.", [L3], {"anna": [0, 0]}),
    ], [L1, L2, L3]),
    # mentions: s1 anna, s2 ben, s3 anna; no character appears in two adjacent shots
    expect(ok(3), ok(3), ok(2), ok(0)),
)

CASES["02_one_line_missing"] = (
    script([
        shot(1, 0, 4, "Anna waits.", [L1]),
        shot(2, 4, 8, "Ben shrugs.", [L2]),
        shot(3, 8, 12, "Anna sighs.", [L3]),
    ], [L1, L2, L3, L4]),
    expect(bad("3/4", 4, "source_dialogue[3]"), ok(3), ok(2), ok(0)),
)

CASES["03_empty_source_with_marker"] = (
    script([shot(1, 0, 5, "The courtyard, empty.", [ND])], []),
    expect(ok(0), ok(0), ok(0), ok(0)),
)

CASES["04_marker_line_satisfied"] = (
    script([
        shot(1, 0, 4, "Anna asks.", [L1]),
        shot(2, 4, 9, "Silence in the courtyard.", [ND]),
    ], [L1, ND]),
    expect(ok(2), ok(1), ok(1), ok(0)),
)

CASES["05_marker_line_unsatisfied"] = (
    script([
        shot(1, 0, 4, "Anna asks.", [L1]),
        shot(2, 4, 9, "Silence in the courtyard."),
    ], [L1, ND]),
    expect(bad("1/2", 2, "source_dialogue[1]"), ok(1), ok(1), ok(0)),
)

CASES["06_whitespace_and_containment"] = (
    script([
        shot(1, 0, 4, "Anna leans in.", [("anna", "Well.  Did you bring the letter? Tell me.")]),
        # spoken by the other character: matching is on text only
        # s2 mentions anna (speaker) and ben (description)
        shot(2, 4, 8, "Ben answers.", [("anna", "It never\narrived.")]),
    ], [("anna", "Did   you bring\tthe letter?"), L2]),
    expect(ok(2), ok(3), ok(1), ok(0)),
)

CASES["07_case_mismatch"] = (
    script([shot(1, 0, 4, "Anna whispers.", [L3])], [("anna", "then we wait.")]),
    expect(bad("0", 1, "source_dialogue[0]"), ok(1), ok(0), ok(0)),
)

CASES["08_line_split_across_shots"] = (
    script([
        shot(1, 0, 4, "Anna asks.", [L1]),
        shot(2, 4, 8, "Ben answers.", [L2]),
    ], [(None, "Did you bring the letter? It never arrived.")]),
    expect(bad("0", 1, "source_dialogue[0]"), ok(2), ok(1), ok(0)),
)

CASES["09_marker_alongside_lines"] = (
    script([
        shot(1, 0, 4, "An empty courtyard.", [ND]),
        shot(2, 4, 8, "Still empty.", [(None, "Wind.")]),
    ], []),
    expect(ok(0), ok(0), ok(1), ok(0)),
)

# --- character consistency -------------------------------------------------

_two = {"anna": [0, 0], "ben": [2, 0]}
CASES["10_undeclared_among_ten"] = (
    script([
        shot(1, 0, 4, "A wide shot of the two.", pos=_two),
        shot(2, 4, 8, "A wide shot of the two.", pos=_two),
        shot(3, 8, 12, "A wide shot of the two.", pos={"anna": [0, 0], "npc_7": [5, 5]}),
        shot(4, 12, 16, "A wide shot of the two.", pos=_two),
        shot(5, 16, 20, "A wide shot of the two.", pos=_two),
    ]),
    # physical units: (1,2) anna+ben, (2,3) anna, (3,4) anna, (4,5) anna+ben
    expect(ok(0), bad("9/10", 10, "shots[2].positions.npc_7"), ok(4), ok(6)),
)

CASES["11_colour_contradiction"] = (
    script([
        shot(1, 0, 4, "Anna pulls her blue coat tight.", [L1]),
        shot(2, 4, 8, "Anna steps forward.", [L3]),
    ], [L1, L3]),
    expect(ok(2), bad("1/2", 2, "shots[0].description"), ok(1), ok(0)),
)

CASES["12_other_character_may_own_phrase"] = (
    # Cara states no coat, so the blue coat may be hers
    script([shot(1, 0, 4, "Anna watches Cara; a blue coat hangs on her shoulders.")]),
    expect(ok(0), ok(2), ok(0), ok(0)),
)

CASES["13_both_contradicted"] = (
    # both state a coat colour and neither is brown
    script([shot(1, 0, 4, "Anna and Ben talk; a brown coat drips with rain.")]),
    expect(ok(0), bad("0", 2, "shots[0].description", "shots[0].description"), ok(0), ok(0)),
)

CASES["14_matching_then_contradicting_length"] = (
    script([
        shot(1, 0, 4, "Anna in her red coat, long black hair loose."),
        shot(2, 4, 8, "Anna, short hair tucked away."),
    ]),
    expect(ok(0), bad("1/2", 2, "shots[1].description"), ok(1), ok(0)),
)

CASES["15_unstated_attribute_ignored"] = (
    script([
        shot(1, 0, 4, "Anna wears something blue."),
        shot(2, 4, 8, "Anna adjusts a blue scarf."),
    ]),
    expect(ok(0), ok(2), ok(1), ok(0)),
)

CASES["16_mention_by_id"] = (
    script([shot(1, 0, 4, "cara looks up, now in a red cloak.")]),
    expect(ok(0), bad("0", 1, "shots[0].description"), ok(0), ok(0)),
)

CASES["17_undeclared_twice"] = (
    script([
        shot(1, 0, 4, "A figure by the gate.", pos={"ghost": [9, 9]}),
        shot(2, 4, 8, "The figure and a woman.", pos={"ghost": [9, 9], "anna": [0, 0]}),
    ]),
    expect(ok(0), bad("1/3", 3, "shots[0].positions.ghost", "shots[1].positions.ghost"), ok(1), ok(1)),
)

# --- scene coherence -------------------------------------------------------

CASES["18_single_location"] = (
    script([
        shot(1, 0, 4, "The courtyard at dusk."),
        shot(2, 4, 8, "Lanterns in the courtyard."),
        shot(3, 8, 12, "The courtyard gate."),
    ]),
    expect(ok(0), ok(0), ok(2), ok(0)),
)

CASES["19_flagged_change"] = (
    script([
        shot(1, 0, 4, "The courtyard at dusk."),
        shot(2, 4, 8, "Lanterns in the courtyard.", bp=True),
        shot(3, 8, 12, "Inside the tavern."),
    ]),
    expect(ok(0), ok(0), ok(2), ok(0)),
)

CASES["20_unflagged_change"] = (
    script([
        shot(1, 0, 4, "The courtyard at dusk."),
        shot(2, 4, 8, "Lanterns in the courtyard."),
        shot(3, 8, 12, "Inside the tavern."),
    ]),
    expect(ok(0), ok(0), bad("1/2", 2, "shots[2]"), ok(0)),
)

CASES["21_inherited_location"] = (
    script([
        shot(1, 0, 4, "Anna runs."),
        shot(2, 4, 8, "Anna reaches the village."),
        shot(3, 8, 12, "She stops."),
    ], setting="A forest clearing at night."),
    expect(ok(0), ok(2), bad("1/2", 2, "shots[1]"), ok(0)),
)

CASES["22_overlapping_locations"] = (
    script([
        shot(1, 0, 4, "The castle courtyard."),
        shot(2, 4, 8, "Inside the castle throne room."),
        shot(3, 8, 12, "The throne room."),
    ]),
    expect(ok(0), ok(0), ok(2), ok(0)),
)

CASES["23_no_locations"] = (
    script([
        shot(1, 0, 4, "Darkness."),
        shot(2, 4, 8, "A match is struck."),
        shot(3, 8, 12, "A face appears."),
    ], setting="Night."),
    expect(ok(0), ok(0), ok(2), ok(0)),
)

CASES["24_two_changes_one_flagged"] = (
    script([
        shot(1, 0, 4, "The courtyard."),
        shot(2, 4, 8, "The tavern."),
        shot(3, 8, 12, "Still in the tavern.", bp=True),
        shot(4, 12, 16, "The forest."),
    ]),
    expect(ok(0), ok(0), bad("2/3", 3, "shots[1]"), ok(0)),
)

# --- physical rationality ----------------------------------------------------

CASES["25_teleport_over_gap"] = (
    script([
        shot(1, 0, 4, "A wide shot.", pos={"anna": [0, 0]}),
        shot(2, 6, 10, "A wide shot.", pos={"anna": [20, 0]}),
    ]),
    # 20 units in 2 s = 10 units/s > 5
    expect(ok(0), ok(2), ok(1), bad("0", 1, "shots[1].positions.anna")),
)

CASES["26_plausible_move"] = (
    script([
        shot(1, 0, 4, "A wide shot.", pos={"anna": [0, 0]}),
        shot(2, 6, 10, "A wide shot.", pos={"anna": [8, 0]}),
    ]),
    expect(ok(0), ok(2), ok(1), ok(1)),
)

CASES["27_move_without_elapsed_time"] = (
    script([
        shot(1, 0, 4, "A wide shot.", pos={"anna": [0, 0]}),
        shot(2, 4, 8, "A wide shot.", pos={"anna": [1, 0]}),
    ]),
    expect(ok(0), ok(2), ok(1), bad("0", 1, "shots[1].positions.anna")),
)

CASES["28_limit_speed_and_jump"] = (
    script([
        shot(1, 0, 4, "A wide shot.", pos={"anna": [0, 0], "ben": [2, 0]}),
        # anna: 5 units in 1 s, exactly the limit
        shot(2, 5, 9, "A wide shot.", pos={"anna": [3, 4], "ben": [2, 0]}),
        shot(3, 9, 13, "A wide shot.", pos={"anna": [3, 4], "ben": [12, 0]}),
    ]),
    expect(ok(0), ok(6), ok(2), bad("3/4", 4, "shots[2].positions.ben")),
)

CASES["29_absent_in_middle_shot"] = (
    script([
        shot(1, 0, 4, "A wide shot.", pos={"anna": [0, 0]}),
        shot(2, 4, 8, "A wide shot.", pos={"ben": [2, 0]}),
        shot(3, 8, 12, "A wide shot.", pos={"anna": [100, 0]}),
    ]),
    expect(ok(0), ok(3), ok(2), ok(0)),
)

# --- everything at once ----------------------------------------------------

CASES["30_all_checks_fail"] = (
    script([
        shot(1, 0, 4, "Anna, in a blue coat, waits in the courtyard.", [L1], {"anna": [0, 0]}),
        shot(2, 4, 8, "Ben enters the tavern.", [L2], {"anna": [0, 0], "ben": [2, 0]}),
        shot(3, 8, 12, "Ben waits.", pos={"anna": [30, 0], "ben": [2, 0]}),
    ], [L1, L2, L3]),
    expect(
        bad("2/3", 3, "source_dialogue[2]"),
        bad("4/5", 5, "shots[0].description"),
        bad("1/2", 2, "shots[1]"),
        bad("2/3", 3, "shots[2].positions.anna"),
    ),
)


def main() -> None:
    assert len(CASES) == 30
    for old in HERE.glob("*.json"):
        old.unlink()
    for name, (doc, expected) in CASES.items():
        (HERE / f"{name}.json").write_text(
            json.dumps({"script": doc, "expected": expected}, indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )


if __name__ == "__main__":
    main()

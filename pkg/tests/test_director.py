from __future__ import annotations

import pytest

from cinescript.director import (
    CONTINUITY_PREAMBLE,
    ClipRef,
    build_scene_prompt,
    execute_plan,
    extract_anchor,
)
from cinescript.errors import MediaError, ServiceError, UnknownShot, VideoGenError
from cinescript.mock import MockServices, after, always
from cinescript.planner import Scene, ScenePlan, segment_scenes
from cinescript.services import NO_WAIT, MediaClient, VideoGenClient


def clients(mock):
    t = mock.transport()
    return (
        VideoGenClient("http://mock", transport=t, retry=NO_WAIT),
        MediaClient("http://mock", transport=t, retry=NO_WAIT),
    )


@pytest.fixture
def three(load_fixture):
    script = load_fixture("director_three_scene.json")
    plan = segment_scenes(script, 10)
    assert [list(s.shot_ids) for s in plan.scenes] == [["s1", "s2"], ["s3", "s4"], ["s5"]]
    return script, plan


def test_three_scene_run_anchors_each_scene(three):
    script, plan = three
    mock = MockServices()
    film = execute_plan(script, plan, *clients(mock))
    assert [c.scene_index for c in film.clips] == [0, 1, 2]
    assert len(film.anchors) == 2
    gens = mock.calls("/v1/generate-video")
    frames = mock.calls("/v1/extract-frame")
    assert len(gens) == 3 and len(frames) == 2
    assert gens[0]["request"]["anchor_uri"] is None
    for i in range(2):
        # the anchor for scene i+1 is exactly what the media service returned for clip i
        assert frames[i]["request"]["clip_uri"] == film.clips[i].uri
        assert gens[i + 1]["request"]["anchor_uri"] == frames[i]["response"]["frame_uri"]
        assert film.anchors[i].uri == frames[i]["response"]["frame_uri"]
        assert film.anchors[i].source == film.clips[i]
    assert not film.prompt_log[0].startswith(CONTINUITY_PREAMBLE)
    assert all(p.startswith(CONTINUITY_PREAMBLE) for p in film.prompt_log[1:])
    assert [g["request"]["prompt"] for g in gens] == film.prompt_log
    assert [g["request"]["duration_s"] for g in gens] == [s.duration_s for s in plan.scenes]


def test_calls_are_strictly_sequential(three):
    script, plan = three
    mock = MockServices()
    execute_plan(script, plan, *clients(mock))
    order = [t["endpoint"] for t in mock.transcript]
    assert order == [
        "/v1/generate-video",
        "/v1/extract-frame",
        "/v1/generate-video",
        "/v1/extract-frame",
        "/v1/generate-video",
    ]


def test_failure_on_second_scene_keeps_partial(three):
    script, plan = three
    mock = MockServices(faults={"/v1/generate-video": after(1, 503)})
    with pytest.raises(VideoGenError) as info:
        execute_plan(script, plan, *clients(mock))
    err = info.value
    assert err.scene_index == 1 and "scene 2" in str(err)
    assert err.attempts == 3 and isinstance(err, ServiceError)
    assert len(err.partial.clips) == 1 and err.partial.clips[0].scene_index == 0
    assert err.to_dict()["scene_index"] == 1
    # the failing scene was retried, nothing after it was attempted
    assert len(mock.calls("/v1/generate-video")) == 1 + 3


def test_media_failure_carries_partial(three):
    script, plan = three
    mock = MockServices(faults={"/v1/extract-frame": always(503)})
    with pytest.raises(MediaError) as info:
        execute_plan(script, plan, *clients(mock))
    assert info.value.attempts == 3
    assert len(info.value.partial.clips) == 1


def test_extract_anchor_retries_then_fails():
    mock = MockServices(faults={"/v1/extract-frame": always(500)})
    _, media = clients(mock)
    with pytest.raises(MediaError) as info:
        extract_anchor(ClipRef(0, "mock://clip/0", 4.0), media)
    assert info.value.attempts == 3
    assert len(mock.calls("/v1/extract-frame")) == 3


def test_extract_anchor_is_idempotent():
    _, media = clients(MockServices())
    clip = ClipRef(0, "mock://clip/7", 4.0)
    a, b = extract_anchor(clip, media), extract_anchor(clip, media)
    assert a == b and a.kind == "last" and a.source is clip


def test_prompt_lists_shots_in_order_with_dialogue(three):
    script, plan = three
    prompt = build_scene_prompt(script, plan.scenes[0])
    assert prompt.startswith("Setting: ")
    assert prompt.index("Shot s1 ") < prompt.index("Shot s2 ")
    for sid in plan.scenes[0].shot_ids:
        shot = script.shot(sid)
        assert shot.description in prompt
        for d in shot.dialogue:
            assert d.text in prompt
    assert build_scene_prompt(script, plan.scenes[0]) == prompt


def test_prompts_deterministic_across_runs(three):
    script, plan = three
    logs = [execute_plan(script, plan, *clients(MockServices())).prompt_log for _ in range(2)]
    assert logs[0] == logs[1]


def test_single_scene_plan_needs_no_anchor(load_fixture):
    script = load_fixture("minimal.json")
    mock = MockServices()
    film = execute_plan(script, segment_scenes(script, 10), *clients(mock))
    assert len(film.clips) == 1 and film.anchors == []
    assert mock.calls("/v1/extract-frame") == []


def test_unknown_shot_rejected_before_any_call(three):
    script, _ = three
    bad = ScenePlan((Scene(0, ("nope",), 4.0, "end"),), 10.0)
    mock = MockServices()
    with pytest.raises(UnknownShot):
        execute_plan(script, bad, *clients(mock))
    assert mock.transcript == []


def test_clip_duration_must_be_positive():
    with pytest.raises(ValueError):
        ClipRef(0, "x", 0.0)

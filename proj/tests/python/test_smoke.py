"""Smoke tests for the slidegym python module."""

import math
import os

import pytest

import slidegym

BRIEF = {
    "id": "edge-computing-analysis",
    "topic": "Edge Computing Analysis",
    "audience": "engineers",
    "num_slides": 3,
    "confidence": 0.75,
    "content": {"market": "$44B by 2027", "driver": "latency-sensitive inference"},
}


def test_catalog_loads_48_briefs():
    briefs_dir = os.path.join(os.environ["SLIDEGYM_SOURCE_DIR"], "data", "briefs")
    briefs = slidegym.load_catalog(briefs_dir)
    assert len(briefs) == 48
    ok, violations = slidegym.validate_brief(briefs[0])
    assert ok, violations


def test_env_episode_loop():
    env = slidegym.Env()
    obs = env.reset(BRIEF)
    assert obs["phase"] == "research"
    assert "turns remaining=35" in obs["observation_text"]

    result = env.step({"tool": "web_search", "query": "edge computing latency"})
    assert result["observation"]["success"]
    assert not result["terminated"]

    result = env.step(
        {
            "tool": "generate_slide",
            "slide_idx": 0,
            "title": "Edge Computing Analysis",
            "sections": [{"heading": "Market", "body": "$44B by 2027"}],
        }
    )
    assert result["observation"]["success"]
    assert result["reward"] > 0

    result = env.step('{"tool": "finalize"}')
    assert result["terminated"]
    assert result["info"]["action_reward"] == pytest.approx(0.1)
    assert env.state()["phase"] == "done"
    assert env.rewards()["aggregate"] == pytest.approx(env.current_quality())


def test_review_deck_exploit_accumulates_035():
    env = slidegym.Env()
    env.reset(BRIEF | {"num_slides": 7})
    total = 0.0
    done = False
    while not done:
        result = env.step({"tool": "review_deck"})
        total += result["reward"]
        done = result["terminated"]
    assert total == pytest.approx(0.35, abs=1e-12)
    assert env.current_quality() == 0.0


def test_prose_turn_is_a_failed_action():
    env = slidegym.Env()
    env.reset(BRIEF)
    result = env.step("let me think about this")
    assert not result["observation"]["success"]
    assert result["reward"] == pytest.approx(-0.02)


def test_parse_tool_call():
    call = slidegym.parse_tool_call('{"tool": "web_search", "query": "ev market"}')
    assert call == {"tool": "web_search", "query": "ev market"}
    assert slidegym.parse_tool_call("no json here") is None
    assert slidegym.parse_tool_call('{"tool": "fly_to_moon"}') is None
    assert len(slidegym.tool_names()) == 14


def test_renderer_and_palettes():
    slide = slidegym.render_slide(
        {"title": "Hello", "sections": [{"heading": "One", "body": "two three"}]},
        theme="dark",
    )
    assert slide["valid_html"]
    assert slide["word_count"] == 4
    valid, findings = slidegym.validate_html(slide["html"])
    assert valid, findings

    pal = slidegym.interpolate_palette("default", colors=1.0)
    assert pal["accent"] == (41, 98, 255)
    gray = slidegym.interpolate_palette("default", colors=0.0)
    assert gray["accent"][0] == gray["accent"][1] == gray["accent"][2]


def test_grpo_math():
    adv = slidegym.compute_advantages([1.0, 2.0, 3.0, 4.0])
    assert adv[0] == pytest.approx(-1.342, abs=1e-3)
    assert adv[3] == pytest.approx(1.342, abs=1e-3)

    assert slidegym.token_logprob([0.0, 0.0, 0.0, 0.0], 1) == pytest.approx(math.log(0.25))
    assert slidegym.clipped_token_loss(1.5, 1.0) == pytest.approx(-1.2)
    assert slidegym.importance_ratio(math.log(2), 0.0) == pytest.approx(2.0)

    value, infinite = slidegym.snr(0.2, 0.1)
    assert value == pytest.approx(4.0) and not infinite
    sigma = slidegym.aggregate_noise([1.0, 2.0, 1.5, 1.5, 2.0, 2.0],
                                     [0.0, 0.0, 0.1, 0.1, 0.0, 0.1])
    assert sigma == pytest.approx(0.029, abs=1e-3)


def test_published_aggregate_cross_check():
    fine_tuned = {
        "code_rules": 0.905,
        "render_quality": 0.958,
        "aesthetic_html": 0.658,
        "aesthetic_visual": 0.539,
        "content_quality": 0.783,
        "spec_reconstruction": 0.530,
    }
    assert slidegym.weighted_aggregate(fine_tuned) == pytest.approx(0.724, abs=0.002)


def test_completion_reward_ladder():
    assert slidegym.completion_reward("thinking out loud", BRIEF) == -2.0
    assert slidegym.completion_reward('{"tool":"edit_slide","slide_idx":5}', BRIEF) == -1.0
    reward = slidegym.completion_reward(
        '{"tool":"create_outline","sections":[{"title":"Edge intro"}]}', BRIEF
    )
    assert reward >= 0.0


def test_scripted_episode_completes():
    script = slidegym.competent_script(BRIEF)
    trajectory = slidegym.run_episode(BRIEF, script)
    assert trajectory["completed"]
    assert trajectory["slides_created"] == 3
    assert trajectory["final"]["aggregate"] > 0.5


def test_inverse_spec_prompt_fidelity():
    prompt = slidegym.inverse_spec_prompt()
    assert "Return ONLY the JSON object." in prompt

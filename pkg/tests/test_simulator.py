import pytest

from tourguide.flow import parse_flow_sheet
from tourguide.llm import LlmTimeoutError, ScriptedTransport
from tourguide.simulator import (
    Persona,
    ScriptRule,
    SpeechRates,
    TranscriptTurn,
    coverage_report,
    estimate_duration,
    longest_path_duration,
    run_persona,
)

from test_engine import mini_resources


def test_cooperative_persona_completes_with_route_cards(
        shipped_graph, shipped_resources, shipped_catalog, shipped_personas):
    persona = next(p for p in shipped_personas if p.persona_id == "cooperative_yes")
    report = run_persona(shipped_graph, shipped_resources, persona, catalog=shipped_catalog)
    assert report.breakdown is None
    assert report.ended_cleanly
    routes_events = [e for t in report.transcript for e in t.events if e["type"] == "routes"]
    assert len(routes_events) == 1
    ids = [r["route_id"] for r in routes_events[0]["routes"]]
    assert len(ids) == 2 and ids[0] != ids[1]
    assert routes_events[0]["reasons"]


def test_empty_replies_terminate_via_defaults(shipped_graph, shipped_resources, shipped_catalog):
    persona = Persona("mute", (), "")
    report = run_persona(shipped_graph, shipped_resources, persona, catalog=shipped_catalog)
    assert report.ended_cleanly
    assert report.breakdown is None


def test_turn_cap_reports_unclean_end(shipped_graph, shipped_resources, shipped_catalog):
    persona = Persona("capped", (), "はい")
    report = run_persona(shipped_graph, shipped_resources, persona,
                         catalog=shipped_catalog, turn_cap=1)
    assert report.ended_cleanly is False
    assert report.turns == 1
    assert report.breakdown is None


def test_script_rules_consumed_in_order():
    sheet = (
        "loop\tice_break\tもう一度どうですか？\tkeyword(yes_words)\t\tloop\n"
        "loop\tice_break\t\tdefault\t\tend\n"
        "end\trecommend\tどうも。\t\t\t\n"
    )
    graph = parse_flow_sheet(sheet).graph
    persona = Persona("looper", (
        ScriptRule("loop", "はい"),
        ScriptRule("loop", "はい"),
        ScriptRule("loop", "もう十分"),
    ), "はい")
    report = run_persona(graph, mini_resources(), persona)
    assert [t.user_text for t in report.transcript] == [None, "はい", "はい", "もう十分"]
    assert report.ended_cleanly


def test_wildcard_rule_matches_any_state():
    sheet = (
        "a\tice_break\tどうですか？\tdefault\t\tend\n"
        "end\trecommend\tどうも。\t\t\t\n"
    )
    graph = parse_flow_sheet(sheet).graph
    persona = Persona("wild", (ScriptRule("*", "なんでも"),), "はい")
    report = run_persona(graph, mini_resources(), persona)
    assert report.transcript[1].user_text == "なんでも"


def test_simulator_swallows_engine_errors_as_breakdown():
    # a template referencing an unset slot raises at render time; the
    # simulator must still hand back a report
    sheet = (
        "a\tice_break\t{profile.never_set}ですか？\tdefault\t\tend\n"
        "end\trecommend\tどうも。\t\t\t\n"
    )
    graph = parse_flow_sheet(sheet).graph
    persona = Persona("boom", (), "はい")
    report = run_persona(graph, mini_resources(), persona)
    assert report.breakdown is not None
    assert report.ended_cleanly is False


def test_identical_inputs_identical_report_bytes(
        shipped_graph, shipped_resources, shipped_catalog, shipped_personas):
    persona = next(p for p in shipped_personas if p.persona_id == "curious_questions")
    a = run_persona(shipped_graph, shipped_resources, persona,
                    catalog=shipped_catalog, seed=5)
    b = run_persona(shipped_graph, shipped_resources, persona,
                    catalog=shipped_catalog, seed=5)
    assert a.to_json() == b.to_json()


def test_llm_stub_injectable(shipped_graph, shipped_resources, shipped_catalog,
                             shipped_personas):
    persona = next(p for p in shipped_personas if p.persona_id == "curious_questions")
    stub = ScriptedTransport(["回答その1です。", LlmTimeoutError("late")])
    report = run_persona(shipped_graph, shipped_resources, persona,
                         catalog=shipped_catalog, llm_stub=stub)
    texts = [e.get("text", "") for t in report.transcript for e in t.events]
    assert "回答その1です。" in texts
    assert report.ended_cleanly  # the timeout degraded to the fallback text


# ---------------------------------------------------------------------------
# estimate_duration
# ---------------------------------------------------------------------------


def test_estimate_empty_transcript_is_zero():
    assert estimate_duration([], SpeechRates()) == 0.0


def test_estimate_single_turn_arithmetic():
    # 80 system chars + 8 user chars at 8/8 cps plus 1.5 s latency = 12.5 s
    turn = TranscriptTurn("s", "あ" * 8, [{"type": "utterance", "text": "う" * 80}])
    rates = SpeechRates(system_cps=8, user_cps=8, per_turn_latency_s=1.5)
    assert estimate_duration([turn], rates) == pytest.approx(12.5)


def test_estimate_counts_filler_and_skips_cards():
    turn = TranscriptTurn("s", "x" * 8, [
        {"type": "filler", "text": "あ" * 4},
        {"type": "routes", "routes": [], "reasons": ["ながいりゆう"]},
        {"type": "utterance", "text": "い" * 4},
    ])
    rates = SpeechRates(system_cps=8, user_cps=8, per_turn_latency_s=0.0)
    assert estimate_duration([turn], rates) == pytest.approx((4 + 4) / 8 + 8 / 8)


def test_estimate_linear_and_monotone():
    turn = TranscriptTurn("s", "やあ", [{"type": "utterance", "text": "こんにちは"}])
    rates = SpeechRates()
    one = estimate_duration([turn], rates)
    four = estimate_duration([turn] * 4, rates)
    assert four == pytest.approx(4 * one)
    longer = TranscriptTurn("s", "やあやあ", [{"type": "utterance", "text": "こんにちは"}])
    assert estimate_duration([longer], rates) > one


def test_invalid_rates_rejected():
    with pytest.raises(ValueError):
        SpeechRates(system_cps=0)


# ---------------------------------------------------------------------------
# longest path / coverage
# ---------------------------------------------------------------------------


def brute_force_longest(graph, rates, user_chars):
    best = [0.0]

    def cost(sid):
        return len(graph.states[sid].utterance_template) / rates.system_cps

    def dfs(sid, seen, acc):
        best[0] = max(best[0], acc)
        for t in graph.states[sid].transitions:
            if t.next_state not in seen:
                dfs(t.next_state, seen | {t.next_state},
                    acc + cost(t.next_state)
                    + user_chars / rates.user_cps + rates.per_turn_latency_s)

    dfs(graph.initial_state, {graph.initial_state},
        cost(graph.initial_state) + rates.per_turn_latency_s)
    return best[0]


def test_longest_path_matches_recursive_enumeration(shipped_graph):
    rates = SpeechRates()
    assert longest_path_duration(shipped_graph, rates) == pytest.approx(
        brute_force_longest(shipped_graph, rates, 10))


def test_longest_path_within_ten_minutes(shipped_graph):
    assert longest_path_duration(shipped_graph) <= 600.0


def test_coverage_all_states():
    sheet = (
        "a\tice_break\tどう？\tdefault\t\tend\n"
        "end\trecommend\tどうも。\t\t\t\n"
    )
    graph = parse_flow_sheet(sheet).graph
    report = run_persona(graph, mini_resources(), Persona("p", (), "x"))
    cov = coverage_report([report], graph)
    assert cov.state_coverage == 1.0
    assert cov.uncovered == []


def test_coverage_no_reports():
    sheet = (
        "a\tice_break\tどう？\tdefault\t\tend\n"
        "end\trecommend\tどうも。\t\t\t\n"
    )
    graph = parse_flow_sheet(sheet).graph
    cov = coverage_report([], graph)
    assert cov.state_coverage == 0.0
    assert cov.uncovered == ["a", "end"]


def test_shipped_pack_full_coverage(shipped_graph, shipped_resources,
                                    shipped_catalog, shipped_personas):
    reports = [run_persona(shipped_graph, shipped_resources, p, catalog=shipped_catalog)
               for p in shipped_personas]
    cov = coverage_report(reports, shipped_graph)
    assert cov.state_coverage == 1.0
    assert all(r.breakdown is None for r in reports)
    assert all(r.ended_cleanly for r in reports)

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import gui_reachable_apis
from sandmine.catalog import default_catalog
from sandmine.explore import (
    TOOLS,
    ExecutionTrace,
    Strategy,
    read_trace,
    repetition_strategies,
    run_exploration,
    union_traces,
    write_trace,
)
from sandmine.fuzz import random_app
from sandmine.ir import parse_app

CAT = default_catalog()

LAUNCH = """
app launch
permission android.permission.READ_PHONE_STATE
entry onCreate
screen main
  widget a handler=onA
method onCreate()
  x = call getDeviceId()
end
method onA()
  y = call getSubscriberId()
end
"""


def test_joker_runs_nothing(sms_leak):
    t = run_exploration(sms_leak, CAT, Strategy("joker", 3, 100))
    assert t.events == () and t.sensitive_calls == frozenset()


def test_launch_handlers_run_at_zero_budget():
    app = parse_app(LAUNCH, CAT)
    t = run_exploration(app, CAT, Strategy("random", 5, 0), step_limit=LIMIT)
    assert t.sensitive_calls == {"getDeviceId"}
    assert t.events == ()


def test_sms_leak_seed7_budget50_matches_exhaustive_oracle(sms_leak):
    t = run_exploration(sms_leak, CAT, Strategy("random", 7, 50))
    assert t.sensitive_calls == gui_reachable_apis(sms_leak, CAT) == {"getDeviceId", "sendSMS"}
    assert len(t.events) == 50


def test_budget_bounds_events():
    app = parse_app(LAUNCH, CAT)
    for tool in ("random", "modelbased", "humanoid"):
        t = run_exploration(app, CAT, Strategy(tool, 1, 17), step_limit=LIMIT)
        assert len(t.events) == 17
        assert t.sensitive_calls == {"getDeviceId", "getSubscriberId"}


def test_screen_without_widgets_ends_run():
    app = parse_app(LAUNCH.replace("  widget a handler=onA\n", "  widget a handler=onA target=end\nscreen end\n"), CAT)
    t = run_exploration(app, CAT, Strategy("random", 0, 100), step_limit=LIMIT)
    assert t.events == (("main", "a"),)


def test_modelbased_prefers_unvisited_by_id():
    text = """
app mb
entry m
screen s
  widget c handler=m
  widget a handler=m
  widget b handler=m
method m()
end
"""
    t = run_exploration(parse_app(text), CAT, Strategy("modelbased", 0, 3))
    assert [w for _, w in t.events] == ["a", "b", "c"]


def test_humanoid_follows_weights():
    text = """
app hw
entry m
screen s
  widget a handler=m weight=1/1000000
  widget b handler=m weight=1000000
method m()
end
"""
    t = run_exploration(parse_app(text), CAT, Strategy("humanoid", 11, 200))
    assert sum(w == "b" for _, w in t.events) >= 199


def test_step_limit_truncates():
    text = """
app loop
entry spin
screen s
method spin()
top:
  goto top
end
"""
    t = run_exploration(parse_app(text), CAT, Strategy("random", 0, 5), step_limit=100)
    assert t.truncated


def test_union_traces(sms_leak):
    mk = lambda apis, tool="random", app="x": ExecutionTrace(app, Strategy(tool), 1, (), frozenset(apis))
    assert union_traces([mk({"A"}), mk({"B"}), mk({"A"})]) == {"A", "B"}
    assert union_traces([mk({"A", "B"})]) == {"A", "B"}
    assert union_traces([mk((), "joker")] * 3) == frozenset()
    with pytest.raises(ValueError):
        union_traces([mk({"A"}), mk({"A"}, app="y")])
    with pytest.raises(ValueError):
        union_traces([mk({"A"}), mk({"A"}, tool="humanoid")])


def test_repetition_seeds():
    assert [s.seed for s in repetition_strategies("random", 10, 5, 3)] == [10, 11, 12]


@pytest.mark.parametrize("bad", [dict(name="monkey"), dict(name="random", budget=-1), dict(name="random", seed=-1)])
def test_strategy_validation(bad):
    with pytest.raises(ValueError):
        Strategy(**bad)


def test_trace_serialization_round_trip(tmp_path, sms_leak):
    t = run_exploration(sms_leak, CAT, Strategy("humanoid", 4, 30), repetition=2)
    write_trace(t, tmp_path / "t.json")
    assert read_trace(tmp_path / "t.json") == t
    assert json.loads(t.to_json())["repetition"] == 2


LIMIT = 1000  # the properties hold for any step limit; a small one keeps looping apps cheap

_apps = st.integers(0, 2**32).map(lambda s: random_app(random.Random(s), sorted(CAT), app_id=f"a{s}"))


@settings(max_examples=100, deadline=None)
@given(_apps, st.sampled_from(TOOLS), st.integers(0, 2**64 - 1), st.integers(0, 60))
def test_deterministic(app, tool, seed, budget):
    s = Strategy(tool, seed, budget)
    assert run_exploration(app, CAT, s, step_limit=LIMIT).to_json() == run_exploration(app, CAT, s, step_limit=LIMIT).to_json()


@settings(max_examples=100, deadline=None)
@given(_apps, st.sampled_from(TOOLS[:3]), st.integers(0, 2**32), st.integers(0, 40), st.integers(0, 40))
def test_monotone_budget(app, tool, seed, b1, extra):
    small = run_exploration(app, CAT, Strategy(tool, seed, b1), step_limit=LIMIT)
    big = run_exploration(app, CAT, Strategy(tool, seed, b1 + extra), step_limit=LIMIT)
    if not small.truncated:
        assert small.sensitive_calls <= big.sensitive_calls
        assert big.events[: len(small.events)] == small.events


@settings(max_examples=100, deadline=None)
@given(_apps, st.sampled_from(TOOLS), st.integers(0, 2**32), st.integers(0, 80))
def test_coverage_bound_and_joker_law(app, tool, seed, budget):
    t = run_exploration(app, CAT, Strategy(tool, seed, budget), step_limit=LIMIT)
    assert t.sensitive_calls <= gui_reachable_apis(app, CAT)
    assert t.sensitive_calls <= set(CAT)
    if tool == "joker":
        assert t.sensitive_calls == frozenset() and t.events == ()

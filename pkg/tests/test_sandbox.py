import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sandmine.catalog import default_catalog
from sandmine.explore import Strategy, run_exploration
from sandmine.fuzz import random_pair
from sandmine.ir import AppPair
from sandmine.sandbox import build_sandbox, detect, observed_calls
from sandmine.static import StaticCallSet, static_sensitive_set

CAT = default_catalog()


def _pair():
    return random_pair(random.Random(0), sorted(CAT), "p")


def test_ws_union():
    sb = build_sandbox("x", {"A"}, StaticCallSet("x", frozenset({"A", "B"})))
    assert sb.allowed == {"A", "B"} and sb.built_with_static


def test_wos_dynamic_only():
    sb = build_sandbox("x", {"A"})
    assert sb.allowed == {"A"} and not sb.built_with_static


def test_joker_ws_is_static_sandbox():
    s = StaticCallSet("x", frozenset({"A", "B"}))
    assert build_sandbox("x", set(), s).allowed == s.apis


def test_detect_reports_offending():
    p = _pair()
    sb = build_sandbox(p.benign.id, {"A", "B"})
    v = detect(p, sb, {"A", "B", "C"}, "random")
    assert v.offending == {"C"} and v.detected
    assert not detect(p, sb, {"A"}).detected


def test_wos_joker_detects_nothing():
    p = _pair()
    assert not detect(p, build_sandbox(p.benign.id, set()), set()).detected


def test_id_mismatch_rejected():
    p = _pair()
    with pytest.raises(ValueError):
        detect(p, build_sandbox("other", set()), set())
    with pytest.raises(ValueError):
        build_sandbox("a", set(), StaticCallSet("b", frozenset()))


_sets = st.frozensets(st.sampled_from(sorted(CAT)), max_size=8)


@given(_sets, _sets, _sets)
def test_growth_never_creates_detections(a, extra, observed):
    p = _pair()
    small = detect(p, build_sandbox(p.benign.id, a), observed)
    big = detect(p, build_sandbox(p.benign.id, a | extra), observed)
    assert big.offending <= small.offending


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(["random", "modelbased", "humanoid", "joker"]), st.booleans())
def test_self_pair_not_detected(seed, tool, ws):
    p0 = random_pair(random.Random(seed), sorted(CAT), "p")
    p = AppPair("self", p0.benign, p0.benign)
    runs = [run_exploration(p.benign, CAT, Strategy(tool, seed + k, 30), k + 1, step_limit=1000) for k in range(3)]
    calls = frozenset().union(*(r.sensitive_calls for r in runs))
    s = static_sensitive_set(p.benign, CAT) if ws else None
    assert not detect(p, build_sandbox(p.benign.id, calls, s), observed_calls(calls, s)).detected

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sandmine.bench.metrics import (
    combine_detectors,
    format_impact,
    impact,
    overlap_from_verdicts,
    overlap_report,
)


@pytest.mark.parametrize(
    "ws,wos,expected",
    [(73, 61, "16.44"), (71, 56, "21.13"), (68, 52, "23.53"), (56, 27, "51.79"), (42, 0, "100.00"), (9, 9, "0.00")],
)
def test_impact_values(ws, wos, expected):
    assert format_impact(impact(ws, wos)) == expected


def test_impact_undefined_and_negative():
    assert impact(0, 0) is None and format_impact(None) == "n/a"
    assert impact(10, 12) == -20.0
    with pytest.raises(ValueError):
        impact(-1, 0)


@given(st.integers(1, 10_000), st.integers(0, 10_000), st.integers(0, 10_000))
def test_impact_algebra(ws, a, b):
    assert impact(ws, 0) == 100
    lo, hi = sorted((a, b))
    assert impact(ws, hi) <= impact(ws, lo)


def test_overlap_disjoint():
    r = overlap_report({"t1": ["p1"], "t2": ["p2"]}, ["p1", "p2", "p3", "p4"])
    assert r.region("t1") == 1 and r.region("t2") == 1 and r.region("t1", "t2") == 0 and r.none == 2


def test_overlap_identical():
    r = overlap_report({"a": ["x", "y"], "b": ["x", "y"], "c": ["y", "x"]}, ["x", "y", "z"])
    assert {k: v for k, v in r.regions.items() if v} == {frozenset("abc"): 2}


def test_overlap_mismatched_pairs():
    with pytest.raises(ValueError):
        overlap_from_verdicts({"a": {"p": True}, "b": {"p": True, "q": False}})
    with pytest.raises(ValueError):
        overlap_report({"a": ["zz"]}, ["p"])


_pairs = [f"p{i}" for i in range(12)]


@given(st.dictionaries(st.sampled_from("abcd"), st.sets(st.sampled_from(_pairs)), min_size=1))
def test_overlap_partition_sums(detected):
    r = overlap_report(detected, _pairs)
    assert sum(r.regions.values()) == r.at_least_one
    assert r.at_least_one + r.none == len(_pairs)
    for t, ps in detected.items():
        assert sum(n for reg, n in r.regions.items() if t in reg) == len(ps)


def test_combine_examples():
    c = combine_detectors({"t": {"p1", "p2"}}, {"p2", "p3"})["t"]
    assert c.combined == 3 and c.increase == 1
    assert combine_detectors({"t": {"p1"}}, set())["t"].combined == 1


@given(st.sets(st.sampled_from(_pairs)), st.sets(st.sampled_from(_pairs)))
def test_combined_dominates(tool, taint):
    c = combine_detectors({"t": tool}, taint)["t"]
    assert max(len(tool), len(taint)) <= c.combined <= len(tool) + len(taint)

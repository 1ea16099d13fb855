import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURES
from sandmine.catalog import default_catalog
from sandmine.fuzz import random_app
from sandmine.ir import (
    Branch,
    CallApi,
    CallMethod,
    Const,
    DatasetError,
    IRDuplicateError,
    IRError,
    IRReferenceError,
    IRSyntaxError,
    lint,
    parse_app,
    parse_pair_dataset,
    serialize,
)

CAT = default_catalog()

MINIMAL = """
app tiny
permission android.permission.INTERNET
entry onCreate
screen main
method onCreate()
end
"""


def check_invariants(app):
    """The model invariants, restated independently of ``validate``."""
    assert app.entry_points and all(e in app.methods for e in app.entry_points)
    ids = [s.id for s in app.screens]
    assert len(ids) == len(set(ids))
    for s in app.screens:
        wids = [w.id for w in s.widgets]
        assert len(wids) == len(set(wids))
        assert s.on_enter is None or s.on_enter in app.methods
        for w in s.widgets:
            assert w.handler in app.methods and w.weight > 0
            assert w.transition is None or w.transition in ids
    for body in app.methods.values():
        n = len(body.statements)
        for st_ in body.statements:
            if isinstance(st_, Branch):
                assert 0 <= st_.then_index <= n and 0 <= st_.else_index <= n
            if isinstance(st_, CallMethod):
                assert st_.callee in app.methods
            if isinstance(st_, CallApi):
                assert st_.api not in app.methods
    assert all(app.manifest.permissions)


def test_minimal_app_accepted():
    app = parse_app(MINIMAL)
    assert app.id == "tiny"
    assert app.entry_points == ("onCreate",)
    assert app.methods["onCreate"].statements == ()
    assert app.start_screen.id == "main"


def test_sms_leak_has_two_sensitive_calls(sms_leak):
    calls = [s for b in sms_leak.methods.values() for s in b.statements if isinstance(s, CallApi) and s.api in CAT]
    assert sorted(c.api for c in calls) == ["getDeviceId", "sendSMS"]


def test_undeclared_call_is_reference_error():
    text = MINIMAL.replace("method onCreate()\n", "method onCreate()\n  call foo(x)\n")
    with pytest.raises(IRReferenceError) as e:
        parse_app(text, CAT)
    assert "foo" in str(e.value)
    assert e.value.name == "foo"


def test_extern_and_catalog_resolve_calls():
    text = MINIMAL.replace("method onCreate()\n", "method onCreate()\n  call foo(x)\n  y = call getDeviceId()\n")
    app = parse_app("extern foo\n" + text, CAT)
    apis = [s.api for s in app.methods["onCreate"].statements]
    assert apis == ["foo", "getDeviceId"]


def test_syntax_error_position():
    text = MINIMAL.replace("method onCreate()\n", "method onCreate()\n  x = = y\n")
    with pytest.raises(IRSyntaxError) as e:
        parse_app(text)
    assert e.value.line == 7


@pytest.mark.parametrize(
    "extra",
    [
        "screen main\n",
        "method onCreate()\nend\n",
    ],
)
def test_duplicates_rejected(extra):
    with pytest.raises(IRDuplicateError):
        parse_app(MINIMAL + extra)


def test_duplicate_widget_rejected():
    text = MINIMAL.replace("screen main\n", "screen main\n  widget a handler=onCreate\n  widget a handler=onCreate\n")
    with pytest.raises(IRDuplicateError):
        parse_app(text)


@pytest.mark.parametrize(
    "old,new",
    [
        ("entry onCreate\n", ""),
        ("entry onCreate\n", "entry nothere\n"),
        ("screen main\n", "screen main\n  widget a handler=onCreate target=nowhere\n"),
        ("screen main\n", "screen main\n  widget a handler=missing\n"),
        ("screen main\n", "screen main on_enter=missing\n"),
    ],
)
def test_dangling_references_rejected(old, new):
    with pytest.raises(IRError):
        parse_app(MINIMAL.replace(old, new))


def test_nonpositive_weight_rejected():
    with pytest.raises(IRError):
        parse_app(MINIMAL.replace("screen main\n", "screen main\n  widget a handler=onCreate weight=0\n"))


def test_branch_labels_and_exit_target():
    text = MINIMAL.replace(
        "method onCreate()\n",
        "method onCreate()\n  if c goto done else 1\n  x = 1\ndone:\n",
    )
    body = parse_app(text).methods["onCreate"]
    assert body.statements[0] == Branch("c", 2, 1)
    assert len(body.statements) == 2


def test_constants_and_weights():
    text = MINIMAL.replace("screen main\n", "screen main\n  widget a handler=onCreate weight=3/2\n").replace(
        "method onCreate()\n", 'method onCreate()\n  a = "hi # there"\n  b = -3\n  c = null\n'
    )
    app = parse_app(text)
    assert app.screens[0].widgets[0].weight == Fraction(3, 2)
    stmts = app.methods["onCreate"].statements
    assert [s.src for s in stmts] == [Const("hi # there"), Const(-3), Const(None)]


def test_lint_flags_read_before_assignment():
    text = MINIMAL.replace("method onCreate()\n", "method onCreate()\n  y = x\n  this.g = y\n")
    warnings = lint(parse_app(text))
    assert len(warnings) == 1 and "'x'" in warnings[0]


def test_fixture_round_trip(sms_leak):
    assert parse_app(serialize(sms_leak), CAT) == sms_leak


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32))
def test_round_trip_random_apps(seed):
    app = random_app(random.Random(seed), sorted(CAT), app_id=f"r{seed}")
    text = serialize(app)
    again = parse_app(text, CAT)
    assert again == app
    assert serialize(again) == text


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32))
def test_parsing_is_pure(seed):
    text = serialize(random_app(random.Random(seed), sorted(CAT)))
    assert parse_app(text, CAT) == parse_app(text, CAT)


def _mutate(rng, text):
    lines = text.splitlines()
    k = rng.randrange(len(lines))
    op = rng.randrange(4)
    if op == 0:
        del lines[k]
    elif op == 1:
        lines.insert(k, lines[rng.randrange(len(lines))])
    elif op == 2:
        toks = lines[k].split()
        if toks:
            toks[rng.randrange(len(toks))] = rng.choice(["zz", "0", "=", "goto", "weight=-1", "target=nope", "end"])
        lines[k] = " ".join(toks)
    else:
        lines[k] = lines[k][: rng.randrange(len(lines[k]) + 1)]
    return "\n".join(lines)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32))
def test_malformed_inputs_rejected_or_valid(seed):
    rng = random.Random(seed)
    text = serialize(random_app(rng, sorted(CAT)))
    for _ in range(rng.randint(1, 3)):
        text = _mutate(rng, text)
    try:
        app = parse_app(text, CAT)
    except IRError:
        return
    check_invariants(app)


def _write_pair(root, pid, benign=True, malign=True):
    d = root / pid
    d.mkdir()
    if benign:
        (d / "benign.app").write_text(MINIMAL.replace("app tiny", f"app {pid}.b"))
    if malign:
        (d / "malign.app").write_text(MINIMAL.replace("app tiny", f"app {pid}.m"))


def test_dataset_three_pairs_sorted(tmp_path):
    for pid in ("c", "a", "b"):
        _write_pair(tmp_path, pid)
    pairs = parse_pair_dataset(tmp_path)
    assert [p.pair_id for p in pairs] == ["a", "b", "c"]


def test_dataset_missing_half_names_pair(tmp_path):
    _write_pair(tmp_path, "ok")
    _write_pair(tmp_path, "broken", malign=False)
    with pytest.raises(DatasetError) as e:
        parse_pair_dataset(tmp_path)
    assert "broken" in str(e.value)


def test_dataset_parse_error_has_pair_context(tmp_path):
    _write_pair(tmp_path, "bad")
    (tmp_path / "bad" / "malign.app").write_text("app x\nentry nope\n")
    with pytest.raises(DatasetError) as e:
        parse_pair_dataset(tmp_path)
    assert "bad" in str(e.value) and "malign" in str(e.value)


def test_empty_dataset_warns(tmp_path, caplog):
    assert parse_pair_dataset(tmp_path) == []
    assert "no pairs" in caplog.text


def test_listing_fixtures_parse():
    pairs = parse_pair_dataset(FIXTURES / "listings", CAT)
    assert [p.pair_id for p in pairs] == ["flyracing", "mathref", "screenguru", "smartrabbits"]

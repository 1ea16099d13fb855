import pytest
from hypothesis import given
from hypothesis import strategies as st

from sandmine.catalog import CatalogError, SensitivityClass, default_catalog, is_sensitive, load_catalog


def test_two_entries():
    cat = load_catalog("getDeviceId source\nsendSMS sink\n")
    assert len(cat) == 2
    assert cat.is_source("getDeviceId") and cat.is_sink("sendSMS")
    assert not cat.is_sink("getDeviceId")


@pytest.mark.parametrize("text", ["", "# only a comment\n\n"])
def test_empty_rejected(text):
    with pytest.raises(CatalogError):
        load_catalog(text)


def test_duplicate_rejected():
    with pytest.raises(CatalogError, match="duplicate"):
        load_catalog("getDeviceId source\ngetDeviceId sink\n")


@pytest.mark.parametrize("line", ["getDeviceId secret", "getDeviceId", "a b c"])
def test_malformed_lines_rejected(line):
    with pytest.raises(CatalogError):
        load_catalog(line)


def test_is_sensitive():
    cat = load_catalog("getDeviceId source\ngetBestProvider sensitive  # neither role\n")
    assert is_sensitive(cat, "getDeviceId")
    assert not is_sensitive(cat, "println")
    assert is_sensitive(cat, "getBestProvider")
    assert not cat.is_source("getBestProvider") and not cat.is_sink("getBestProvider")


def test_both_class():
    cat = load_catalog("openFileOutput both")
    assert cat.is_source("openFileOutput") and cat.is_sink("openFileOutput")


def test_default_catalog_covers_fixture_apis():
    cat = default_catalog()
    for api in ("getDeviceId", "getSubscriberId", "getSimSerialNumber", "sendSMS", "getLastKnownLocation",
                "getMacAddress", "HttpClient.execute"):
        assert api in cat
    assert load_catalog(cat.dumps()) == cat


_api = st.from_regex(r"[A-Za-z][A-Za-z0-9.]{0,12}", fullmatch=True)


@given(st.dictionaries(_api, st.sampled_from(list(SensitivityClass)), min_size=1, max_size=30))
def test_loaded_entries_are_sensitive_with_one_class(entries):
    text = "".join(f"{a} {k.value}\n" for a, k in entries.items())
    cat = load_catalog(text)
    assert set(cat) == set(entries)
    for a, k in entries.items():
        assert is_sensitive(cat, a)
        assert cat.klass(a) is k

import filecmp

import pytest

from sandmine.bench.experiment import ExperimentConfig, load_dataset, run_experiment
from sandmine.catalog import default_catalog
from sandmine.static import diff_manifest, static_sensitive_set
from sandmine.synth import DYNAMIC_TOOLS, load_ground_truth, shipped_dataset, synthetic_pairs, write_dataset

CAT = default_catalog()


@pytest.fixture(scope="module")
def shipped():
    pairs, skipped = load_dataset(shipped_dataset(), CAT)
    assert not skipped
    return pairs


@pytest.fixture(scope="module")
def run(shipped):
    return run_experiment(shipped, CAT, ExperimentConfig())


def test_shipped_dataset_matches_generator(tmp_path):
    fresh = write_dataset(tmp_path / "syn")
    cmp = filecmp.dircmp(fresh, shipped_dataset())
    assert not cmp.left_only and not cmp.right_only and not cmp.diff_files
    for sub in cmp.common_dirs:
        c = filecmp.dircmp(fresh / sub, shipped_dataset() / sub)
        assert not c.diff_files and not c.left_only and not c.right_only, sub


def test_size_and_ids(shipped):
    assert len(shipped) == len(synthetic_pairs()) >= 30
    truth = load_ground_truth(shipped_dataset())
    assert sorted(truth) == [p.pair_id for p in shipped]


def test_static_truth(shipped):
    truth = load_ground_truth(shipped_dataset())
    for p in shipped:
        diff = static_sensitive_set(p.malign, CAT).apis - static_sensitive_set(p.benign, CAT).apis
        assert bool(diff) == truth[p.pair_id].static, p.pair_id


def test_dynamic_and_taint_truth(run):
    truth = load_ground_truth(shipped_dataset())
    for tool in DYNAMIC_TOOLS:
        expected = {pid for pid, t in truth.items() if tool in t.dynamic}
        assert run.detected_pairs(tool, False) == expected, tool
    assert run.taint_detected() == {pid for pid, t in truth.items() if t.taint}


def test_manifest_only_pairs_change_manifest(shipped):
    truth = load_ground_truth(shipped_dataset())
    for p in shipped:
        if truth[p.pair_id].category == "manifest":
            assert not diff_manifest(p).empty

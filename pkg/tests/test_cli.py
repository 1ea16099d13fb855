import json

import pytest

from sandmine.bench.cli import main
from sandmine.bench.metrics import format_impact, impact
from sandmine.bench.report import parse_detections_table


def test_list_tools(capsys):
    assert main(["list-tools"]) == 0
    assert capsys.readouterr().out.split() == ["random", "modelbased", "humanoid", "joker"]


def test_joker_without_static_all_zero(tmp_path, capsys):
    assert main(["run", "--tools", "joker", "--disable-static-analysis", "--out", str(tmp_path), "--no-traces",
                 "--no-figures"]) == 0
    out = capsys.readouterr().out
    assert "| joker | n/a | 0 | n/a |" in out
    summary = json.loads(next(tmp_path.glob("*/summary.json")).read_text())
    assert summary["counts"] == {"joker": {"WOS": 0}}


def test_unknown_tool_lists_valid(capsys):
    assert main(["run", "--tools", "monkey"]) == 1
    err = capsys.readouterr().err
    assert "monkey" in err and "random, modelbased, humanoid, joker" in err


def test_usage_errors_exit_1(capsys):
    assert main([]) == 1
    assert main(["run", "--budget", "many"]) == 1
    assert main(["run", "-r", "0"]) == 1


def test_dataset_error_exit_2(tmp_path):
    assert main(["run", "--dataset", str(tmp_path / "missing"), "--out", str(tmp_path)]) == 2
    broken = tmp_path / "broken" / "p1"
    broken.mkdir(parents=True)
    (broken / "benign.app").write_text("app a\nentry m\nmethod m()\nend\n")
    assert main(["run", "--dataset", str(broken.parent), "--strict", "--out", str(tmp_path)]) == 2


def test_run_then_report(tmp_path, capsys):
    assert main(["run", "--out", str(tmp_path), "--run-id", "r", "-t", "60", "--no-traces"]) == 0
    capsys.readouterr()
    assert main(["report", str(tmp_path / "r")]) == 0
    rows = parse_detections_table((tmp_path / "r" / "report.md").read_text())
    assert [r["Tool"] for r in rows] == ["random", "modelbased", "humanoid", "joker"]
    for r in rows:
        assert r["Impact (%)"] == format_impact(impact(int(r["Exec. (WS)"]), int(r["Exec. (WOS)"])))
    assert (tmp_path / "r" / "figures" / "detections.png").stat().st_size > 0

    assert main(["report", str(tmp_path / "r"), "--output-format", "json", "--no-figures"]) == 0
    data = json.loads((tmp_path / "r" / "report.json").read_text())
    assert data["detections"][3]["Exec. (WOS)"] == "0"
    assert main(["report", str(tmp_path / "r"), "--output-format", "csv", "--no-figures"]) == 0
    assert (tmp_path / "r" / "report.csv").read_text().startswith("Tool,Exec. (WS),Exec. (WOS),Impact (%)")

    capsys.readouterr()
    assert main(["regress", str(tmp_path / "r")]) == 0
    assert "Static" in capsys.readouterr().out
    assert main(["regress", str(tmp_path / "r"), "--formula", "Detected ~ Colour"]) == 1


def test_report_on_non_run_dir(tmp_path):
    assert main(["report", str(tmp_path)]) == 1


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tools": ["joker"], "budget": 5, "repetitions": 1, "output-format": "json",
                               "out": str(tmp_path / "res"), "run_id": "c", "no_traces": True, "no_figures": True}))
    assert main(["run", "--config", str(cfg), "--seed", "4"]) == 0
    summary = json.loads((tmp_path / "res" / "c" / "summary.json").read_text())
    assert summary["config"]["seed"] == 4 and summary["config"]["tools"] == ["joker"]
    assert (tmp_path / "res" / "c" / "report.json").is_file()
    cfg.write_text(json.dumps({"colour": 1}))
    assert main(["run", "--config", str(cfg)]) == 1


def test_taint_command(capsys):
    from conftest import FIXTURES

    d = FIXTURES / "listings" / "screenguru"
    assert main(["taint", "--witness", str(d / "benign.app"), str(d / "malign.app")]) == 0
    out = capsys.readouterr().out
    assert "getDeviceId->sendSMS" in out and "detected 1 of 1" in out
    assert main(["taint"]) == 0
    assert "detected 17 of 34" in capsys.readouterr().out


def test_gen_dataset(tmp_path):
    assert main(["gen-dataset", str(tmp_path / "d")]) == 0
    assert (tmp_path / "d" / "ground_truth.json").is_file()

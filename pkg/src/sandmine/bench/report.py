"""Tables and figures computed from a results directory.

The report is always rebuilt from the files a run wrote, so ``report`` on
an old run directory and the report written at the end of ``run`` agree.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .experiment import UNION, ExperimentConfig, Observation, read_observations
from .metrics import combine_detectors, format_impact, format_pct, impact, overlap_report
from .regression import RegressionFit, SeparationWarning, fit_logistic

DETECTIONS_HEADER = ("Tool", "Exec. (WS)", "Exec. (WOS)", "Impact (%)")
STATIC_LABEL = "static"  # the joker-WS sandbox, i.e. static analysis alone
TAINT_LABEL = "taint"


@dataclass
class RunData:
    config: ExperimentConfig
    observations: list[Observation]
    pair_ids: list[str]
    skipped: list[tuple[str, str]]
    taint: dict[str, bool] = field(default_factory=dict)
    new_flows: dict[str, str] = field(default_factory=dict)
    taint_seconds: dict[str, float] = field(default_factory=dict)

    def detected(self, tool: str, static_enabled: bool, repetition: Optional[int] = None) -> set[str]:
        return {
            o.pair_id
            for o in self.observations
            if o.tool == tool and o.static_enabled == static_enabled and o.repetition == repetition and o.detected
        }

    def count(self, tool: str, static_enabled: bool) -> Optional[int]:
        if static_enabled not in self.config.static_modes:
            return None
        return len(self.detected(tool, static_enabled))

    @property
    def taint_detected(self) -> set[str]:
        return {p for p, d in self.taint.items() if d}


def load_run(run_dir: str | Path) -> RunData:
    run_dir = Path(run_dir)
    summary_path = run_dir / "summary.json"
    if not summary_path.is_file():
        raise FileNotFoundError(f"{run_dir} is not a results directory (no summary.json)")
    summary = json.loads(summary_path.read_text(encoding="utf-8"))
    data = RunData(
        ExperimentConfig.from_dict(summary["config"]),
        read_observations(run_dir / "observations.csv"),
        list(summary["pairs"]),
        [(s["pair_id"], s["reason"]) for s in summary["skipped"]],
    )
    taint_path = run_dir / "taint.csv"
    if taint_path.is_file():
        with open(taint_path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                data.taint[row["pair_id"]] = row["detected"] == "true"
                data.new_flows[row["pair_id"]] = row["new_flows"]
    timing_path = run_dir / "timing.csv"
    if timing_path.is_file():
        with open(timing_path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                if row["phase"] == "taint":
                    data.taint_seconds[row["pair_id"]] = float(row["seconds"])
    return data


# tables


def detections_table(data: RunData) -> list[tuple[str, str, str, str]]:
    rows = []
    for tool in data.config.tools:
        ws, wos = data.count(tool, True), data.count(tool, False)
        imp = impact(ws, wos) if ws is not None and wos is not None else None
        rows.append((tool, "n/a" if ws is None else str(ws), "n/a" if wos is None else str(wos), format_impact(imp)))
    return rows


def overlap_tools(data: RunData) -> tuple[str, ...]:
    return tuple(t for t in data.config.tools if t != "joker")


def overlap_rows(data: RunData, static_enabled: bool) -> list[tuple[str, int]]:
    tools = overlap_tools(data)
    if not tools:
        return []
    rep = overlap_report({t: data.detected(t, static_enabled) for t in tools}, data.pair_ids)
    rows = [(" & ".join(t for t in tools if t in region), n) for region, n in rep.regions.items()]
    rows.append(("at least one", rep.at_least_one))
    rows.append(("none", rep.none))
    return rows


def combined_rows(data: RunData, static_enabled: bool) -> list[tuple[str, int, int, int, str]]:
    """Tool count, increase from taint, combined count and its share of all pairs."""
    combined = combine_detectors({t: data.detected(t, static_enabled) for t in data.config.tools}, data.taint_detected)
    n = len(data.pair_ids)
    return [(c.tool, c.tool_count, c.increase, c.combined, format_pct(c.combined, n)) for c in combined.values()]


@dataclass
class RegressionResult:
    title: str
    formula: str
    fit: Optional[RegressionFit]
    note: str = ""


def _fit(title: str, obs: list[Observation], formula: str, *, cell_means: bool = False) -> RegressionResult:
    if not obs:
        return RegressionResult(title, formula, None, "no observations")
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", SeparationWarning)
            fit = fit_logistic(obs, formula, cell_means=cell_means)
    except ValueError as e:
        return RegressionResult(title, formula, None, str(e))
    note = "; ".join(str(w.message) for w in caught if issubclass(w.category, SeparationWarning))
    return RegressionResult(title, formula, fit, note)


def regressions(data: RunData) -> list[RegressionResult]:
    out = []
    per_rep = [o for o in data.observations if o.repetition is not None and o.tool != "joker"]
    formula = "Detected ~ Tool + Static + Repetition"
    if data.config.disable_static:
        formula = "Detected ~ Tool + Repetition"
    if len({o.tool for o in per_rep}) < 2:
        formula = formula.replace("Tool + ", "")
    out.append(_fit("Sandbox detection, per repetition", per_rep, formula))

    if "joker" in data.config.tools and not data.config.disable_static and data.taint:
        static_obs = [
            Observation(STATIC_LABEL, None, True, o.pair_id, o.detected)
            for o in data.observations
            if o.tool == "joker" and o.static_enabled and o.repetition is None
        ]
        taint_obs = [Observation(TAINT_LABEL, None, False, p, data.taint[p]) for p in data.pair_ids if p in data.taint]
        both = static_obs + taint_obs
        out.append(_fit("Static analysis vs taint differencing", both, "Detected ~ Tool"))
        out.append(_fit("Static analysis vs taint differencing, one level per tool", both, "Detected ~ Tool", cell_means=True))
    return out


# rendering


def md_table(header, rows) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in r) + " |" for r in rows]
    return "\n".join(lines)


def _num(x: float) -> str:
    if x != x:
        return "nan"
    out = f"{x:.4f}"
    return "0.0000" if out == "-0.0000" else out


def reg_rows(fit: RegressionFit) -> list[tuple[str, ...]]:
    return [(name, _num(b), _num(se), _num(p), _num(ci[0]), _num(ci[1])) for name, b, se, p, ci in fit.rows()]


REG_HEADER = ("Predictor", "Estimate", "Std. Error", "p-value", "CI low", "CI high")


def render_markdown(data: RunData, figures: Optional[list[Path]] = None) -> str:
    c = data.config
    parts = ["# Sandbox mining run", ""]
    parts.append(
        f"Pairs evaluated: {len(data.pair_ids)} (skipped: {len(data.skipped)}). "
        f"Tools: {', '.join(c.tools)}. Budget {c.budget} events, {c.repetitions} repetition(s), seed {c.seed}."
    )
    parts += ["", "## Detections (union of repetitions)", "", md_table(DETECTIONS_HEADER, detections_table(data)), ""]
    for ws in c.static_modes:
        rows = overlap_rows(data, ws)
        if rows:
            parts += [f"## Tool overlap ({'WS' if ws else 'WOS'})", "", md_table(("Detected by exactly", "Pairs"), rows), ""]
    if data.taint:
        n = len(data.pair_ids)
        k = len(data.taint_detected)
        parts += ["## Taint differencing", "", f"New source-sink pairs in {k} of {n} pairs ({format_pct(k, n)}%).", ""]
        for ws in c.static_modes:
            parts += [
                f"### Sandbox or taint ({'WS' if ws else 'WOS'})",
                "",
                md_table(("Tool", "Sandbox", "Taint increase", "Total", "Total (%)"), combined_rows(data, ws)),
                "",
            ]
    for reg in regressions(data):
        parts += [f"## Logistic regression: {reg.title}", "", f"`{reg.formula}`", ""]
        if reg.fit is not None and not reg.fit.separation:
            parts += [md_table(REG_HEADER, reg_rows(reg.fit)), "", f"AIC {reg.fit.aic:.4f}, n = {reg.fit.n_obs}.", ""]
        else:
            parts += [f"Not estimable: {reg.note}", ""]
    if data.skipped:
        parts += ["## Skipped pairs", "", md_table(("Pair", "Reason"), data.skipped), ""]
    if figures:
        parts += ["## Figures", ""] + [f"![{p.stem}](figures/{p.name})" for p in figures] + [""]
    return "\n".join(parts)


def report_dict(data: RunData) -> dict:
    c = data.config
    regs = []
    for reg in regressions(data):
        entry = {"title": reg.title, "formula": reg.formula, "note": reg.note, "estimates": None}
        if reg.fit is not None and not reg.fit.separation:
            entry["estimates"] = [
                {"predictor": n, "estimate": b, "std_error": se, "p_value": p, "ci": list(ci)}
                for n, b, se, p, ci in reg.fit.rows()
            ]
            entry["aic"] = reg.fit.aic
            entry["n_obs"] = reg.fit.n_obs
        regs.append(entry)
    return {
        "config": c.to_dict(),
        "pairs": len(data.pair_ids),
        "skipped": [{"pair_id": p, "reason": r} for p, r in data.skipped],
        "detections": [dict(zip(DETECTIONS_HEADER, r)) for r in detections_table(data)],
        "overlap": {("WS" if ws else "WOS"): dict(overlap_rows(data, ws)) for ws in c.static_modes},
        "taint_detected": sorted(data.taint_detected) if data.taint else None,
        "combined": {
            ("WS" if ws else "WOS"): [
                {"tool": t, "sandbox": a, "increase": inc, "total": tot, "total_pct": pct}
                for t, a, inc, tot, pct in combined_rows(data, ws)
            ]
            for ws in c.static_modes
        } if data.taint else None,
        "regressions": regs,
    }


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def render_detections(data: RunData, fmt: str) -> str:
    rows = detections_table(data)
    if fmt == "markdown":
        return md_table(DETECTIONS_HEADER, rows)
    if fmt == "json":
        return json.dumps([dict(zip(DETECTIONS_HEADER, r)) for r in rows], indent=1)
    return "\n".join(",".join(r) for r in [DETECTIONS_HEADER] + rows)


def write_report(run_dir: str | Path, fmt: Optional[str] = None, *, figures: bool = True) -> Path:
    """Write ``report.<md|json|csv>`` (and figures) into ``run_dir``; returns the report path."""
    run_dir = Path(run_dir)
    data = load_run(run_dir)
    fmt = fmt or data.config.output_format
    figs: list[Path] = []
    if figures:
        from .plotting import write_figures

        figs = write_figures(data, run_dir / "figures")
    if fmt == "markdown":
        path = run_dir / "report.md"
        path.write_text(render_markdown(data, figs), encoding="utf-8")
    elif fmt == "json":
        path = run_dir / "report.json"
        path.write_text(json.dumps(report_dict(data), indent=1, sort_keys=True) + "\n", encoding="utf-8")
    elif fmt == "csv":
        path = run_dir / "report.csv"
        _write_csv(path, DETECTIONS_HEADER, detections_table(data))
        for ws in data.config.static_modes:
            tag = "ws" if ws else "wos"
            _write_csv(run_dir / f"overlap_{tag}.csv", ("region", "pairs"), overlap_rows(data, ws))
            if data.taint:
                _write_csv(
                    run_dir / f"combined_{tag}.csv",
                    ("tool", "sandbox", "taint_increase", "total", "total_pct"),
                    combined_rows(data, ws),
                )
        coef_rows = []
        for reg in regressions(data):
            if reg.fit is not None and not reg.fit.separation:
                coef_rows += [(reg.formula,) + r for r in reg_rows(reg.fit)]
        _write_csv(run_dir / "regression.csv", ("formula",) + REG_HEADER, coef_rows)
    else:
        raise ValueError(f"unknown output format {fmt!r}")
    return path


def parse_detections_table(text: str) -> list[dict[str, str]]:
    """Read the detections table back out of a markdown report."""
    lines = text.splitlines()
    head = "| " + " | ".join(DETECTIONS_HEADER) + " |"
    start = lines.index(head)
    rows = []
    for line in lines[start + 2:]:
        if not line.startswith("|"):
            break
        cells = [c.strip() for c in line.strip("|").split("|")]
        rows.append(dict(zip(DETECTIONS_HEADER, cells)))
    return rows


__all__ = [
    "RunData",
    "load_run",
    "detections_table",
    "overlap_rows",
    "combined_rows",
    "regressions",
    "render_markdown",
    "render_detections",
    "report_dict",
    "write_report",
    "parse_detections_table",
    "UNION",
]

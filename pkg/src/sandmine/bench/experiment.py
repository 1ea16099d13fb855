"""The WS/WOS experiment matrix over a dataset of benign/malign pairs.

For every pair and tool, both versions are explored ``repetitions`` times
with seeds ``seed, seed+1, ...`` (the same seeds for both versions). Each
configuration (WS: static set fused into sandbox and observation; WOS:
dynamic traces only) yields one verdict per repetition plus one over the
union of all repetitions. Taint differencing runs once per pair.

Work items are independent; with ``jobs > 1`` pairs run in worker
processes and the results are reduced in pair-id order, so the output
does not depend on scheduling.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ..catalog import SensitiveCatalog
from ..explore import (
    DEFAULT_BUDGET,
    DEFAULT_STEP_LIMIT,
    TOOLS,
    ExecutionTrace,
    repetition_strategies,
    run_exploration,
    union_traces,
    write_trace,
)
from ..ir import AppPair, DatasetError, IRError, load_app
from ..sandbox import SandboxVerdict, build_sandbox, detect, observed_calls
from ..static import ManifestDiff, diff_manifest, static_sensitive_set
from ..taint import TaintVerdict, taint_diff, write_flows

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json", "markdown")
UNION = "union"
OBS_COLUMNS = ("tool", "repetition", "static_enabled", "pair_id", "detected")


@dataclass(frozen=True)
class ExperimentConfig:
    tools: tuple[str, ...] = TOOLS
    budget: int = DEFAULT_BUDGET
    repetitions: int = 3
    disable_static: bool = False
    seed: int = 0
    output_format: str = "markdown"
    step_limit: int = DEFAULT_STEP_LIMIT
    taint: bool = True
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "tools", tuple(self.tools))
        if not self.tools:
            raise ValueError("at least one tool is required")
        unknown = [t for t in self.tools if t not in TOOLS]
        if unknown:
            raise ValueError(f"unknown tool(s) {', '.join(unknown)}; valid tools: {', '.join(TOOLS)}")
        if len(set(self.tools)) != len(self.tools):
            raise ValueError("tools listed twice")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.budget < 0:
            raise ValueError("budget must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.output_format not in FORMATS:
            raise ValueError(f"output format must be one of {', '.join(FORMATS)}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    @property
    def static_modes(self) -> tuple[bool, ...]:
        """Configurations to run, WS first."""
        return (False,) if self.disable_static else (True, False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tools"] = list(self.tools)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config key(s): {', '.join(sorted(extra))}")
        return cls(**d)


@dataclass(frozen=True)
class Observation:
    tool: str
    repetition: Optional[int]  # None: union over all repetitions
    static_enabled: bool
    pair_id: str
    detected: bool

    def row(self) -> list[str]:
        rep = UNION if self.repetition is None else str(self.repetition)
        return [self.tool, rep, str(self.static_enabled).lower(), self.pair_id, str(self.detected).lower()]

    @classmethod
    def from_row(cls, row: dict) -> "Observation":
        rep = row["repetition"]
        return cls(
            row["tool"],
            None if rep == UNION else int(rep),
            row["static_enabled"] == "true",
            row["pair_id"],
            row["detected"] == "true",
        )


@dataclass
class PairResult:
    pair_id: str
    verdicts: list[tuple[Optional[int], SandboxVerdict]]
    traces: dict[tuple[str, str], list[ExecutionTrace]]
    taint: Optional[TaintVerdict]
    manifest: ManifestDiff
    timing: dict[str, float]

    def observations(self) -> list[Observation]:
        return [Observation(v.tool, rep, v.with_static, self.pair_id, v.detected) for rep, v in self.verdicts]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    pairs: list[PairResult] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)

    @property
    def pair_ids(self) -> list[str]:
        return [p.pair_id for p in self.pairs]

    @property
    def observations(self) -> list[Observation]:
        return [o for p in self.pairs for o in p.observations()]

    def detected_pairs(self, tool: str, static_enabled: bool, repetition: Optional[int] = None) -> set[str]:
        return {
            o.pair_id
            for o in self.observations
            if o.tool == tool and o.static_enabled == static_enabled and o.repetition == repetition and o.detected
        }

    def counts(self) -> dict[str, dict[str, int]]:
        """Union-of-repetitions detection counts, ``tool -> {"WS"|"WOS": n}``."""
        out: dict[str, dict[str, int]] = {}
        for tool in self.config.tools:
            out[tool] = {
                ("WS" if ws else "WOS"): len(self.detected_pairs(tool, ws)) for ws in self.config.static_modes
            }
        return out

    def taint_detected(self) -> set[str]:
        return {p.pair_id for p in self.pairs if p.taint is not None and p.taint.detected}


def evaluate_pair(pair: AppPair, catalog: SensitiveCatalog, config: ExperimentConfig) -> PairResult:
    timing: dict[str, float] = {}
    t0 = time.perf_counter()
    static = {
        "benign": static_sensitive_set(pair.benign, catalog),
        "malign": static_sensitive_set(pair.malign, catalog),
    }
    timing["static"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    traces: dict[tuple[str, str], list[ExecutionTrace]] = {}
    for tool in config.tools:
        strategies = repetition_strategies(tool, config.seed, config.budget, config.repetitions)
        for version, app in (("benign", pair.benign), ("malign", pair.malign)):
            traces[tool, version] = [
                run_exploration(app, catalog, s, k, config.step_limit) for k, s in enumerate(strategies, start=1)
            ]
    timing["explore"] = time.perf_counter() - t0

    verdicts: list[tuple[Optional[int], SandboxVerdict]] = []
    for tool in config.tools:
        b_runs, m_runs = traces[tool, "benign"], traces[tool, "malign"]
        for ws in config.static_modes:
            sb = static["benign"] if ws else None
            sm = static["malign"] if ws else None
            groups: list[tuple[Optional[int], frozenset, frozenset]] = [
                (k, b.sensitive_calls, m.sensitive_calls) for k, (b, m) in enumerate(zip(b_runs, m_runs), start=1)
            ]
            groups.append((None, union_traces(b_runs), union_traces(m_runs)))
            for rep, b_calls, m_calls in groups:
                sandbox = build_sandbox(pair.benign.id, b_calls, sb)
                verdicts.append((rep, detect(pair, sandbox, observed_calls(m_calls, sm), tool)))

    taint = None
    if config.taint:
        t0 = time.perf_counter()
        taint = taint_diff(pair, catalog)
        timing["taint"] = time.perf_counter() - t0
    return PairResult(pair.pair_id, verdicts, traces, taint, diff_manifest(pair), timing)


def _evaluate_safe(args) -> tuple[Optional[PairResult], Optional[str]]:
    pair, catalog, config = args
    try:
        return evaluate_pair(pair, catalog, config), None
    except Exception as e:  # any analysis failure drops the pair, as with uninstrumentable apps
        return None, f"{type(e).__name__}: {e}"


def load_dataset(
    root: str | Path, catalog: Iterable[str] | None = None, *, strict: bool = False
) -> tuple[list[AppPair], list[tuple[str, str]]]:
    """Load every pair under ``root``; broken pairs are skipped (or raise when ``strict``).

    A missing or empty dataset directory is always an error.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(str(root), "dataset directory does not exist")
    pairs, skipped = [], []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        try:
            halves = {}
            for half in ("benign", "malign"):
                f = sub / f"{half}.app"
                if not f.is_file():
                    raise DatasetError(sub.name, f"missing {half}.app")
                try:
                    halves[half] = load_app(f, catalog)
                except IRError as e:
                    raise DatasetError(sub.name, f"{half}.app: {e}") from e
            if halves["benign"].id == halves["malign"].id:
                raise DatasetError(sub.name, "benign and malign versions share the app id")
            pairs.append(AppPair(sub.name, halves["benign"], halves["malign"]))
        except DatasetError as e:
            if strict:
                raise
            logger.warning("skipping pair %s: %s", sub.name, e)
            skipped.append((sub.name, str(e)))
    if not pairs and not skipped:
        raise DatasetError(str(root), "dataset contains no pairs")
    return pairs, skipped


def run_experiment(
    pairs: Sequence[AppPair], catalog: SensitiveCatalog, config: ExperimentConfig
) -> ExperimentResult:
    result = ExperimentResult(config)
    work = [(p, catalog, config) for p in sorted(pairs, key=lambda p: p.pair_id)]
    if config.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(_evaluate_safe, work))
    else:
        outcomes = [_evaluate_safe(w) for w in work]
    for (pair, _, _), (res, err) in zip(work, outcomes):
        if res is None:
            logger.warning("skipping pair %s: %s", pair.pair_id, err)
            result.skipped.append((pair.pair_id, err))
        else:
            result.pairs.append(res)
    return result


# results directory


def write_observations(observations: Iterable[Observation], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(OBS_COLUMNS)
        for o in observations:
            w.writerow(o.row())


def read_observations(path: str | Path) -> list[Observation]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != OBS_COLUMNS:
            raise ValueError(f"{path}: expected columns {', '.join(OBS_COLUMNS)}")
        return [Observation.from_row(r) for r in reader]


def _flow_cell(pairs: Iterable[tuple[str, str]]) -> str:
    return ";".join(f"{s}->{t}" for s, t in sorted(pairs))


def write_results(result: ExperimentResult, out_dir: str | Path, *, traces: bool = True) -> Path:
    """Write the run to ``out_dir``; everything except ``timing.csv`` is deterministic."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_observations(result.observations, out / "observations.csv")

    with open(out / "verdicts.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pair_id", "tool", "config", "repetition", "detected", "offending"])
        for p in result.pairs:
            for rep, v in p.verdicts:
                w.writerow([
                    p.pair_id, v.tool, "WS" if v.with_static else "WOS",
                    UNION if rep is None else rep, str(v.detected).lower(), " ".join(sorted(v.offending)),
                ])

    with open(out / "taint.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pair_id", "detected", "new_flows", "manifest_changed"])
        for p in result.pairs:
            if p.taint is None:
                continue
            w.writerow([p.pair_id, str(p.taint.detected).lower(), _flow_cell(p.taint.s3), str(not p.manifest.empty).lower()])

    with open(out / "timing.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pair_id", "phase", "seconds"])
        for p in result.pairs:
            for phase, sec in p.timing.items():
                w.writerow([p.pair_id, phase, f"{sec:.6f}"])

    if traces:
        for p in result.pairs:
            d = out / "traces" / p.pair_id
            d.mkdir(parents=True, exist_ok=True)
            for (tool, version), runs in p.traces.items():
                for t in runs:
                    write_trace(t, d / f"{tool}-{version}-r{t.repetition}.json")
            if p.taint is not None:
                fd = out / "flows" / p.pair_id
                fd.mkdir(parents=True, exist_ok=True)
                write_flows(p.taint.s1, fd / "benign.jsonl")
                write_flows(p.taint.s2, fd / "malign.jsonl")

    summary = {
        "config": result.config.to_dict(),
        "pairs": result.pair_ids,
        "skipped": [{"pair_id": pid, "reason": why} for pid, why in result.skipped],
        "counts": result.counts(),
        "taint_detected": len(result.taint_detected()) if result.config.taint else None,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return out

"""Detection-count metrics: impact of the static component, tool overlap, detector fusion."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Optional


def impact(ws_count: int, wos_count: int) -> Optional[float]:
    """Percentage of WS detections lost without the static component.

    ``None`` when ``ws_count`` is zero. Negative when WOS detects more.
    """
    if ws_count < 0 or wos_count < 0:
        raise ValueError("detection counts are non-negative")
    if ws_count == 0:
        return None
    return (ws_count - wos_count) * 100 / ws_count


def format_impact(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.2f}"


def format_pct(part: int, whole: int) -> str:
    return "n/a" if whole == 0 else f"{part * 100 / whole:.2f}"


@dataclass(frozen=True)
class OverlapReport:
    tools: tuple[str, ...]
    regions: dict[frozenset[str], int]  # exact-membership region -> pair count
    at_least_one: int
    none: int
    total: int

    def region(self, *tools: str) -> int:
        return self.regions[frozenset(tools)]

    def unique(self, tool: str) -> int:
        return self.regions[frozenset((tool,))]


def overlap_report(detected: Mapping[str, Iterable[str]], pair_ids: Iterable[str]) -> OverlapReport:
    """Partition ``pair_ids`` by exactly which tools detected each pair.

    ``detected`` maps tool -> detected pair ids; every id must belong to
    ``pair_ids``. All non-empty tool subsets appear in ``regions``.
    """
    pair_ids = list(pair_ids)
    universe = set(pair_ids)
    if len(universe) != len(pair_ids):
        raise ValueError("duplicate pair ids")
    tools = tuple(detected)
    det = {t: set(ps) for t, ps in detected.items()}
    for t, ps in det.items():
        stray = ps - universe
        if stray:
            raise ValueError(f"tool {t!r} reports pairs outside the evaluated set: {sorted(stray)}")
    regions = {frozenset(c): 0 for k in range(1, len(tools) + 1) for c in combinations(tools, k)}
    none = 0
    for pid in pair_ids:
        members = frozenset(t for t in tools if pid in det[t])
        if members:
            regions[members] += 1
        else:
            none += 1
    return OverlapReport(tools, regions, len(pair_ids) - none, none, len(pair_ids))


def overlap_from_verdicts(verdicts: Mapping[str, Mapping[str, bool]]) -> OverlapReport:
    """Same as :func:`overlap_report` from ``tool -> {pair_id: detected}`` tables.

    Raises if the tools were not evaluated on the same pairs.
    """
    tools = list(verdicts)
    if not tools:
        raise ValueError("no tools given")
    pair_set = set(verdicts[tools[0]])
    for t in tools[1:]:
        if set(verdicts[t]) != pair_set:
            raise ValueError(f"tool {t!r} was evaluated on a different pair set than {tools[0]!r}")
    return overlap_report({t: [p for p, d in v.items() if d] for t, v in verdicts.items()}, sorted(pair_set))


@dataclass(frozen=True)
class CombinedCount:
    tool: str
    tool_count: int
    combined: int

    @property
    def increase(self) -> int:
        return self.combined - self.tool_count


def combine_detectors(
    tool_detected: Mapping[str, Iterable[str]], taint_detected: Iterable[str]
) -> dict[str, CombinedCount]:
    """Per tool, the pairs caught by the tool's sandbox or by taint differencing."""
    taint = set(taint_detected)
    out = {}
    for tool, pairs in tool_detected.items():
        pairs = set(pairs)
        out[tool] = CombinedCount(tool, len(pairs), len(pairs | taint))
    return out

"""Report figures, rendered off-screen to PNG."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .report import RunData, overlap_rows  # noqa: E402


def _detections(data: RunData, path: Path) -> None:
    tools = list(data.config.tools)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    width = 0.38
    modes = data.config.static_modes
    for k, ws in enumerate(modes):
        counts = [data.count(t, ws) or 0 for t in tools]
        xs = [i + (k - (len(modes) - 1) / 2) * width for i in range(len(tools))]
        ax.bar(xs, counts, width, label="WS" if ws else "WOS")
    ax.set_xticks(range(len(tools)), tools)
    ax.set_ylabel("pairs detected")
    ax.set_title(f"Sandbox detections over {len(data.pair_ids)} pairs")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def _overlap(data: RunData, path: Path, static_enabled: bool) -> bool:
    rows = [(r, n) for r, n in overlap_rows(data, static_enabled) if r not in ("at least one", "none")]
    if not rows:
        return False
    fig, ax = plt.subplots(figsize=(6, 0.35 * len(rows) + 1.2))
    ax.barh(range(len(rows)), [n for _, n in rows])
    ax.set_yticks(range(len(rows)), [r for r, _ in rows])
    ax.invert_yaxis()
    ax.set_xlabel("pairs detected by exactly these tools")
    ax.set_title(f"Tool overlap ({'WS' if static_enabled else 'WOS'})")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return True


def _taint_time(data: RunData, path: Path) -> bool:
    secs = [data.taint_seconds[p] for p in sorted(data.taint_seconds)]
    if not secs:
        return False
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.hist([s * 1000 for s in secs], bins=min(20, max(5, len(secs) // 2)))
    ax.set_xlabel("taint differencing time per pair (ms)")
    ax.set_ylabel("pairs")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return True


def write_figures(data: RunData, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    p = out / "detections.png"
    _detections(data, p)
    written.append(p)
    for ws in data.config.static_modes:
        p = out / f"overlap_{'ws' if ws else 'wos'}.png"
        if _overlap(data, p, ws):
            written.append(p)
    p = out / "taint_time.png"
    if _taint_time(data, p):
        written.append(p)
    return written

"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 dataset error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from ..catalog import CatalogError, default_catalog, load_catalog_file
from ..explore import TOOLS
from ..ir import AppPair, DatasetError, IRError, load_app
from ..synth import shipped_dataset, write_dataset
from ..taint import taint_diff
from .experiment import FORMATS, ExperimentConfig, load_dataset, read_observations, run_experiment, write_results
from .regression import SeparationWarning, fit_logistic
from .report import REG_HEADER, load_run, md_table, reg_rows, render_detections, write_report

EXIT_OK, EXIT_USAGE, EXIT_DATASET = 0, 1, 2

log = logging.getLogger("sandmine")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _tool_list(values: Optional[list[str]]) -> Optional[list[str]]:
    if values is None:
        return None
    tools = [t for v in values for t in v.split(",") if t]
    bad = [t for t in tools if t not in TOOLS]
    if bad:
        raise UsageError(f"unknown tool(s): {', '.join(bad)}; valid tools: {', '.join(TOOLS)}")
    return tools


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sandmine", description="Sandbox mining and taint differencing over benign/malign app pairs.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("list-tools", help="print the available exploration strategies")

    run = sub.add_parser("run", help="run the WS/WOS experiment over a dataset")
    run.add_argument("--config", type=Path, help="JSON file with any of the options below")
    run.add_argument("--tools", nargs="+", metavar="TOOL", help=f"subset of {', '.join(TOOLS)} (comma or space separated)")
    run.add_argument("-t", "--budget", type=int, help="events per exploration run (default 200)")
    run.add_argument("-r", "--repetitions", type=int, help="explorations per tool and version (default 3)")
    run.add_argument("--seed", type=int, help="base seed; repetition k uses seed+k-1 (default 0)")
    run.add_argument("--output-format", choices=FORMATS, help="report format (default markdown)")
    run.add_argument("--disable-static-analysis", action="store_true", default=None, help="run the WOS configuration only")
    run.add_argument("--no-taint", action="store_true", default=None, help="skip taint differencing")
    run.add_argument("--jobs", type=int, help="worker processes (default 1)")
    run.add_argument("--dataset", type=Path, help="pair dataset directory (default: shipped synthetic dataset)")
    run.add_argument("--catalog", type=Path, help="sensitive API catalog file")
    run.add_argument("--out", type=Path, help="results root (default results)")
    run.add_argument("--run-id", help="results subdirectory name (default derived from the options)")
    run.add_argument("--strict", action="store_true", default=None, help="fail on the first unreadable pair")
    run.add_argument("--no-traces", action="store_true", default=None, help="do not write traces/ and flows/")
    run.add_argument("--no-figures", action="store_true", default=None, help="do not render figures")

    rep = sub.add_parser("report", help="rebuild the report of a finished run")
    rep.add_argument("run_dir", type=Path)
    rep.add_argument("--output-format", choices=FORMATS)
    rep.add_argument("--no-figures", action="store_true")

    tnt = sub.add_parser("taint", help="taint differencing of one pair or a whole dataset")
    tnt.add_argument("apps", nargs="*", type=Path, metavar="APP", help="BENIGN.app MALIGN.app (otherwise --dataset)")
    tnt.add_argument("--dataset", type=Path)
    tnt.add_argument("--catalog", type=Path)
    tnt.add_argument("--witness", action="store_true", help="print a witness path per new flow")

    reg = sub.add_parser("regress", help="fit a logistic model to a run's observations")
    reg.add_argument("run_dir", type=Path)
    reg.add_argument("--formula", default="Detected ~ Tool + Static + Repetition")
    reg.add_argument("--include-joker", action="store_true", help="keep joker observations")
    reg.add_argument("--cell-means", action="store_true", help="one column per tool instead of contrasts")

    gen = sub.add_parser("gen-dataset", help="write the synthetic pair dataset")
    gen.add_argument("out", type=Path)
    return p


def _catalog(path: Optional[Path]):
    return load_catalog_file(path) if path else default_catalog()


_RUN_KEYS = {
    "tools": "tools",
    "budget": "budget",
    "repetitions": "repetitions",
    "seed": "seed",
    "output_format": "output_format",
    "disable_static_analysis": "disable_static",
    "jobs": "jobs",
}
_EXTRA_KEYS = ("dataset", "catalog", "out", "run_id", "strict", "no_taint", "no_traces", "no_figures")


def _merge_run_options(args) -> tuple[ExperimentConfig, dict]:
    """Config-file values, overridden by flags given on the command line."""
    cfg: dict = {}
    if args.config is not None:
        try:
            cfg = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {args.config}: {e}") from e
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        unknown = set(cfg) - set(_RUN_KEYS) - set(_EXTRA_KEYS)
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    for key in list(_RUN_KEYS) + list(_EXTRA_KEYS):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if "tools" in cfg:
        tools = cfg["tools"]
        cfg["tools"] = _tool_list([tools] if isinstance(tools, str) else list(tools))
    kwargs = {_RUN_KEYS[k]: cfg[k] for k in _RUN_KEYS if k in cfg}
    if cfg.get("no_taint"):
        kwargs["taint"] = False
    try:
        config = ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as e:
        raise UsageError(str(e)) from e
    return config, {k: cfg.get(k) for k in _EXTRA_KEYS}


def _cmd_run(args) -> int:
    config, extra = _merge_run_options(args)
    dataset = Path(extra["dataset"]) if extra["dataset"] else shipped_dataset()
    catalog = _catalog(Path(extra["catalog"]) if extra["catalog"] else None)
    pairs, load_skips = load_dataset(dataset, catalog, strict=bool(extra["strict"]))
    result = run_experiment(pairs, catalog, config)
    result.skipped = sorted(load_skips + result.skipped)
    run_id = extra["run_id"] or (
        f"{dataset.name}-s{config.seed}-t{config.budget}-r{config.repetitions}"
        + ("-wos" if config.disable_static else "")
    )
    out_dir = write_results(result, Path(extra["out"] or "results") / run_id, traces=not extra["no_traces"])
    report = write_report(out_dir, config.output_format, figures=not extra["no_figures"])
    print(render_detections(load_run(out_dir), config.output_format))
    print(f"pairs: {len(result.pairs)}, skipped: {len(result.skipped)}")
    print(f"report: {report}")
    return EXIT_OK


def _cmd_report(args) -> int:
    try:
        path = write_report(args.run_dir, args.output_format, figures=not args.no_figures)
    except FileNotFoundError as e:
        raise UsageError(str(e)) from e
    data = load_run(args.run_dir)
    print(render_detections(data, args.output_format or data.config.output_format))
    print(f"report: {path}")
    return EXIT_OK


def _cmd_taint(args) -> int:
    catalog = _catalog(args.catalog)
    if args.apps:
        if len(args.apps) != 2:
            raise UsageError("taint takes exactly two apps: BENIGN MALIGN")
        try:
            b, m = (load_app(p, catalog) for p in args.apps)
        except (OSError, IRError) as e:
            raise DatasetError(str(args.apps), str(e)) from e
        pairs = [AppPair(args.apps[0].parent.name or "pair", b, m)]
    else:
        pairs, skipped = load_dataset(args.dataset or shipped_dataset(), catalog)
        for pid, why in skipped:
            print(f"# skipped {pid}: {why}")
    detected = 0
    for pair in pairs:
        v = taint_diff(pair, catalog, witnesses=args.witness)
        detected += v.detected
        flows = ";".join(f"{s}->{t}" for s, t in sorted(v.s3))
        print(f"{pair.pair_id}\t{'detected' if v.detected else 'clean'}\t{flows}")
        if args.witness:
            for f in sorted(v.s2.flows, key=lambda f: (f.pair, f.witness)):
                if f.pair in v.s3:
                    path = " -> ".join(f"{meth}:{idx}" for meth, idx in f.witness)
                    print(f"\t{f.source} -> {f.sink}: {path}")
    print(f"detected {detected} of {len(pairs)}")
    return EXIT_OK


def _cmd_regress(args) -> int:
    import warnings

    try:
        obs = read_observations(args.run_dir / "observations.csv")
    except OSError as e:
        raise UsageError(f"cannot read observations: {e}") from e
    if not args.include_joker:
        obs = [o for o in obs if o.tool != "joker"]
    if "Repetition" in args.formula:
        obs = [o for o in obs if o.repetition is not None]
    else:
        obs = [o for o in obs if o.repetition is None]
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", SeparationWarning)
            fit = fit_logistic(obs, args.formula, cell_means=args.cell_means)
    except ValueError as e:
        raise UsageError(str(e)) from e
    if fit.separation:
        print(f"not estimable: {caught[0].message if caught else 'separation'}")
        return EXIT_OK
    print(md_table(REG_HEADER, reg_rows(fit)))
    print(f"AIC {fit.aic:.4f}, n = {fit.n_obs}, iterations {fit.iterations}")
    return EXIT_OK


def _cmd_gen(args) -> int:
    root = write_dataset(args.out)
    print(f"wrote synthetic dataset to {root}")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "report": _cmd_report,
    "taint": _cmd_taint,
    "regress": _cmd_regress,
    "gen-dataset": _cmd_gen,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "list-tools":
        print("\n".join(TOOLS))
        return EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except UsageError as e:
        print(f"sandmine: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, CatalogError, OSError) as e:
        print(f"sandmine: dataset error: {e}", file=sys.stderr)
        return EXIT_DATASET


if __name__ == "__main__":
    sys.exit(main())

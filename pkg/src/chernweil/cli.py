"""Command line front end: run scenarios, sweep a parameter, list.

Per-check results stream to stdout in a stable text format (the same
bytes on every rerun of the same config); wall-clock timings and file
paths go to stderr.  Exit code 0 means every non-skipped check passed,
1 flags numerical divergence with the report still written, 2 flags a
config or usage error before any numerics ran.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import coerce, load_config
from .errors import ChernWeilError, ConfigError, UsageError
from .reporting import (RunReport, _num, render_figure, write_csv,
                        write_json, write_sweep_csv)
from .scenarios import (SWEEP_AXES, describe_scenarios, resolve,
                        run_scenario)

__all__ = ["main", "build_parser"]

OUT_ENV = "CHERNWEIL_OUT"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chernweil",
        description="desk-scale checks for characteristic forms and the "
                    "currents of singular bundle maps")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario from a config file")
    run.add_argument("config", help="path to a 'section.key = value' file")
    run.add_argument("--out", default=None,
                     help=f"output directory (default: config output.dir, "
                          f"then ${OUT_ENV}, then ./out)")
    run.add_argument("--no-figures", action="store_true",
                     help="skip rendering the scenario figure")

    sweep = sub.add_parser(
        "sweep", help="rerun one scenario across a parameter axis")
    sweep.add_argument("config")
    sweep.add_argument("--axis", required=True, choices=SWEEP_AXES)
    sweep.add_argument("--values", required=True,
                       help="comma-separated values for the axis")
    sweep.add_argument("--out", default=None)
    sweep.add_argument("--no-figures", action="store_true")

    sub.add_parser("list", help="list scenarios, their keys and axes")
    return parser


def _out_root(cli_out: str | None, cfg_out: str | None) -> str:
    root = cli_out or cfg_out or os.environ.get(OUT_ENV) or "./out"
    os.makedirs(root, exist_ok=True)
    return root


def _print_rows(report: RunReport) -> None:
    for r in report.rows:
        if r.skipped:
            print(f"SKIP {report.scenario}.{r.name} ({r.note})")
            continue
        status = "PASS" if r.passed else "FAIL"
        line = (f"{status} {report.scenario}.{r.name} value={_num(r.value)} "
                f"expected={_num(r.expected)} tol={_num(r.tol)}")
        if r.cmp == "ge":
            line += " (at least)"
        print(line)


def _summary_line(reports) -> str:
    rows = [r for rep in reports for r in rep.rows]
    checked = [r for r in rows if not r.skipped]
    passed = sum(r.passed for r in checked)
    skipped = len(rows) - len(checked)
    tail = f", {skipped} skipped" if skipped else ""
    return f"{passed}/{len(checked)} checks passed{tail}"


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    scenario, params, seed, cfg_out = resolve(cfg)
    root = _out_root(args.out, cfg_out)
    report = run_scenario(scenario, params, seed, cfg.digest)

    csv_path = os.path.join(root, f"{scenario.name}.csv")
    json_path = os.path.join(root, f"{scenario.name}.json")
    write_csv(csv_path, report)
    write_json(json_path, [report])
    written = [csv_path, json_path]
    if not args.no_figures:
        png_path = os.path.join(root, f"{scenario.name}.png")
        if render_figure(report, png_path):
            written.append(png_path)

    _print_rows(report)
    print(_summary_line([report]))
    print(f"{scenario.name}: {report.total_seconds:.2f}s", file=sys.stderr)
    for path in written:
        print(f"wrote {path}", file=sys.stderr)
    return 0 if report.passed else 1


def _sweep_overrides(scenario, axis: str, raw_values: str):
    """Coerced scalar values plus the per-run parameter overrides."""
    if axis not in scenario.axes:
        raise ConfigError(
            f"scenario {scenario.name} has no {axis!r} axis; available: "
            + (", ".join(sorted(scenario.axes)) or "(none)"))
    pname = scenario.axes[axis]
    spec = scenario.params[pname]
    scalar_kind = {"ints": "int", "floats": "float",
                   "strs": "str"}.get(spec.kind, spec.kind)
    values, overrides = [], []
    for part in raw_values.split(","):
        part = part.strip()
        if not part:
            continue
        v = coerce(scalar_kind, part, key=f"--values ({axis})", line=None,
                   choices=spec.choices)
        values.append(v)
        overrides.append((v,) if spec.kind in ("ints", "floats", "strs")
                        else v)
    if not values:
        raise ConfigError("--values lists at least one value")
    return pname, values, overrides


def _sweep_figure(scenario_name: str, axis: str, values, blocks,
                  digest: str) -> RunReport:
    """A synthetic report carrying the cross-block error figure."""
    names = sorted({r.name for b in blocks for r in b.rows
                    if not r.skipped and r.cmp == "abs"})
    series = []
    for name in names:
        ys = []
        for b in blocks:
            match = [r.error for r in b.rows if r.name == name
                     and not r.skipped]
            ys.append(match[0] if match else float("nan"))
        series.append({"label": name, "y": ys})
    if axis == "mode":
        fig = {"kind": "bar", "labels": [str(v) for v in values],
               "series": series, "yscale": "log",
               "title": f"{scenario_name}: error by mode",
               "ylabel": "abs error"}
    else:
        fig = {"kind": "line", "x": [float(v) for v in values],
               "series": series, "xscale": "log", "yscale": "log",
               "title": f"{scenario_name}: error vs {axis}",
               "xlabel": axis, "ylabel": "abs error"}
    return RunReport(scenario_name, digest, (), extras={"figure": fig})


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    scenario, params, seed, cfg_out = resolve(cfg)
    root = _out_root(args.out, cfg_out)
    pname, values, overrides = _sweep_overrides(scenario, args.axis,
                                                args.values)

    blocks = []
    for v, override in zip(values, overrides):
        block_params = dict(params)
        block_params[pname] = override
        report = run_scenario(scenario, block_params, seed, cfg.digest)
        blocks.append(report)
        print(f"# {args.axis} = {v}")
        _print_rows(report)
        print(f"{scenario.name}[{args.axis}={v}]: "
              f"{report.total_seconds:.2f}s", file=sys.stderr)

    stem = f"{scenario.name}_sweep_{args.axis}"
    csv_path = os.path.join(root, f"{stem}.csv")
    json_path = os.path.join(root, f"{stem}.json")
    write_sweep_csv(csv_path, blocks, args.axis, values)
    write_json(json_path, blocks, sweep_axis=args.axis, sweep_values=values)
    written = [csv_path, json_path]
    if not args.no_figures:
        png_path = os.path.join(root, f"{stem}.png")
        fig_report = _sweep_figure(scenario.name, args.axis, values, blocks,
                                   cfg.digest)
        if render_figure(fig_report, png_path):
            written.append(png_path)

    print(_summary_line(blocks))
    for path in written:
        print(f"wrote {path}", file=sys.stderr)
    return 0 if all(b.passed for b in blocks) else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list":
            print(describe_scenarios())
            return 0
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_sweep(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ChernWeilError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

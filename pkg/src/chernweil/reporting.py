"""Check rows, delimited reports, and figure rendering for scenario runs.

The CSV is the deterministic artifact: schema-versioned header, fixed
column order, shortest-round-trip float formatting, seconds pinned to 0
so reruns are byte-identical.  Wall-clock timings go to the JSON twin,
which is identical up to its timing fields.  Figures are rendered from a
small declarative payload each scenario attaches to its report, so the
renderer stays generic and headless.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from math import log
from typing import Mapping, Sequence

from .errors import UsageError

CSV_SCHEMA = "# schema=1"
CSV_COLUMNS = ("scenario", "check", "value", "expected", "tol", "pass",
               "h", "s", "mode", "seconds")

__all__ = ["CheckRow", "RunReport", "check_row", "skip_row", "write_csv",
           "write_sweep_csv", "write_json", "render_figure", "CSV_COLUMNS"]


@dataclass(frozen=True)
class CheckRow:
    name: str
    value: float
    expected: float
    tol: float
    passed: bool
    cmp: str = "abs"                 # abs | ge | skip
    h: float | None = None
    s: float | None = None
    mode: str = ""
    seconds: float = 0.0
    note: str = ""

    @property
    def skipped(self) -> bool:
        return self.cmp == "skip"

    @property
    def error(self) -> float:
        return abs(self.value - self.expected)


def check_row(name: str, value, expected: float, tol: float, *,
              cmp: str = "abs", h: float | None = None,
              s: float | None = None, mode: str = "",
              seconds: float = 0.0) -> CheckRow:
    value = float(value)
    if cmp == "abs":
        passed = abs(value - expected) <= tol
    elif cmp == "ge":
        passed = value >= expected
    else:
        raise UsageError(f"unknown comparison {cmp!r}")
    return CheckRow(name, value, float(expected), float(tol), passed,
                    cmp=cmp, h=h, s=s, mode=mode, seconds=seconds)


def skip_row(name: str, reason: str, *, mode: str = "") -> CheckRow:
    """An explicitly recorded skip; never silent, never counted as failed."""
    return CheckRow(name, float("nan"), float("nan"), float("nan"),
                    passed=True, cmp="skip", mode=mode, note=reason)


@dataclass(frozen=True)
class RunReport:
    scenario: str
    config_digest: str
    rows: tuple[CheckRow, ...]
    total_seconds: float = 0.0
    extras: Mapping[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows if not r.skipped)

    def with_timing(self, seconds: float) -> "RunReport":
        return replace(self, total_seconds=seconds)


# ---------------------------------------------------------------------------
# delimited output
# ---------------------------------------------------------------------------

def _num(v) -> str:
    if v is None:
        return ""
    v = float(v)
    if v != v:                       # NaN marks skip rows
        return ""
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _pass_cell(row: CheckRow) -> str:
    if row.skipped:
        return "skip"
    return "true" if row.passed else "false"


def _row_cells(report: RunReport, row: CheckRow) -> list[str]:
    return [report.scenario, row.name, _num(row.value), _num(row.expected),
            _num(row.tol), _pass_cell(row), _num(row.h), _num(row.s),
            row.mode, "0"]


def _skip_comments(reports: Sequence[RunReport]) -> list[str]:
    out = []
    for rep in reports:
        for row in rep.rows:
            if row.skipped:
                out.append(f"# skip {rep.scenario}.{row.name}: {row.note}")
    return out


def write_csv(path: str, report: RunReport) -> None:
    lines = [CSV_SCHEMA, ",".join(CSV_COLUMNS)]
    lines += [",".join(_row_cells(report, row)) for row in report.rows]
    lines += _skip_comments([report])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _axis_scale(axis: str, value, row: CheckRow) -> float | None:
    """The length scale convergence orders are measured against."""
    if axis == "resolution":
        return row.h if row.h is not None else 1.0 / float(value)
    if axis == "s":
        return float(value)
    return None


def write_sweep_csv(path: str, blocks: Sequence[RunReport], axis: str,
                    values: Sequence) -> None:
    """One row-block per swept value, plus an observed-order column.

    The order between consecutive values is log(err_prev/err_cur) over
    log(scale_prev/scale_cur); rows whose errors sit at the floor, skip
    rows, and the mode axis leave the column empty.
    """
    lines = [CSV_SCHEMA, ",".join(CSV_COLUMNS + ("order",))]
    prev: dict[str, tuple[float, float]] = {}
    for value, rep in zip(values, blocks):
        for row in rep.rows:
            order = ""
            scale = None if row.skipped else _axis_scale(axis, value, row)
            if scale is not None and row.cmp == "abs":
                err = row.error
                if row.name in prev:
                    perr, pscale = prev[row.name]
                    if err > 1e-14 and perr > 1e-14 and pscale != scale:
                        order = _num(log(perr / err) / log(pscale / scale))
                prev[row.name] = (err, scale)
            lines.append(",".join(_row_cells(rep, row) + [order]))
    lines += _skip_comments(blocks)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _report_payload(report: RunReport, timings: bool) -> dict:
    rows = []
    for r in report.rows:
        rows.append({
            "check": r.name,
            "value": None if r.value != r.value else r.value,
            "expected": None if r.expected != r.expected else r.expected,
            "tol": None if r.tol != r.tol else r.tol,
            "pass": None if r.skipped else r.passed,
            "comparison": r.cmp,
            "h": r.h, "s": r.s, "mode": r.mode,
            "seconds": round(r.seconds, 6) if timings else 0.0,
            "note": r.note,
        })
    extras = {k: v for k, v in report.extras.items() if k != "figure"}
    return {
        "scenario": report.scenario,
        "config_hash": report.config_digest,
        "pass": report.passed,
        "rows": rows,
        "total_seconds": round(report.total_seconds, 6) if timings else 0.0,
        "extras": extras,
    }


def write_json(path: str, reports: Sequence[RunReport], *,
               sweep_axis: str | None = None,
               sweep_values: Sequence = ()) -> None:
    if sweep_axis is None:
        payload = _report_payload(reports[0], timings=True)
    else:
        payload = {
            "axis": sweep_axis,
            "values": list(sweep_values),
            "blocks": [_report_payload(r, timings=True) for r in reports],
        }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

def render_figure(report: RunReport, path: str) -> bool:
    """Render the report's declarative figure payload to ``path``.

    Payload kinds: "line" (x, series, optional log scales), "bar"
    (labels, series), "heatmap" (x, y, z).  Returns False when the
    report carries no figure.  matplotlib is imported lazily and pinned
    to the Agg backend so runs stay headless.
    """
    fig_spec = report.extras.get("figure")
    if not fig_spec:
        return False
    import matplotlib
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.2), dpi=120)
    kind = fig_spec.get("kind", "line")
    if kind == "line":
        for series in fig_spec["series"]:
            ax.plot(fig_spec["x"], series["y"], marker="o",
                    label=series.get("label", ""))
        ax.set_xscale(fig_spec.get("xscale", "linear"))
        ax.set_yscale(fig_spec.get("yscale", "linear"))
        if any(s.get("label") for s in fig_spec["series"]):
            ax.legend(fontsize=8)
    elif kind == "bar":
        labels = fig_spec["labels"]
        idx = range(len(labels))
        nseries = len(fig_spec["series"])
        width = 0.8 / max(nseries, 1)
        for j, series in enumerate(fig_spec["series"]):
            offs = [i + (j - (nseries - 1) / 2.0) * width for i in idx]
            ax.bar(offs, series["y"], width=width,
                   label=series.get("label", ""))
        ax.set_xticks(list(idx))
        ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
        if any(s.get("label") for s in fig_spec["series"]):
            ax.legend(fontsize=8)
        if fig_spec.get("yscale"):
            ax.set_yscale(fig_spec["yscale"])
    elif kind == "heatmap":
        mesh = ax.pcolormesh(fig_spec["x"], fig_spec["y"], fig_spec["z"],
                             shading="auto")
        fig.colorbar(mesh, ax=ax)
    else:
        plt.close(fig)
        raise UsageError(f"unknown figure kind {kind!r}")
    ax.set_title(fig_spec.get("title", report.scenario), fontsize=10)
    ax.set_xlabel(fig_spec.get("xlabel", ""))
    ax.set_ylabel(fig_spec.get("ylabel", ""))
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": "chernweil"})
    plt.close(fig)
    return True

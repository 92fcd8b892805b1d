"""Pack-run reporting: delimited summary, JUnit XML, and figures.

simulate-pack writes, next to the per-persona report JSON:

* summary.csv — one row per persona (turns, duration, clean end, ...)
* durations.png — estimated duration per persona against the 600 s budget
* coverage.png — visit count per flow state across the pack
* junit.xml (optional) — one testcase per persona plus pack-level checks
"""

from __future__ import annotations

import csv
from pathlib import Path
from xml.etree import ElementTree as ET

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .flow import FlowGraph
from .simulator import TEN_MINUTE_BUDGET_S, CoverageReport, SimReport

SUMMARY_COLUMNS = (
    "persona_id",
    "turns",
    "estimated_duration_s",
    "ended_cleanly",
    "states_visited",
    "breakdown",
)


def write_summary_csv(reports: list[SimReport], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(SUMMARY_COLUMNS)
        for report in reports:
            writer.writerow([
                report.persona_id,
                report.turns,
                f"{report.estimated_duration_s:.2f}",
                str(report.ended_cleanly).lower(),
                len(report.visited_states),
                report.breakdown or "",
            ])
    return path


def render_figures(reports: list[SimReport], graph: FlowGraph,
                   out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    ids = [r.persona_id for r in reports]
    durations = [r.estimated_duration_s for r in reports]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    bars = ax.bar(ids, durations, color="#4878a8")
    ax.axhline(TEN_MINUTE_BUDGET_S, color="#b04040", linestyle="--",
               label=f"budget {TEN_MINUTE_BUDGET_S:.0f}s")
    ax.bar_label(bars, fmt="%.0f")
    ax.set_ylabel("estimated duration [s]")
    ax.set_title("Persona run duration vs. ten-minute budget")
    ax.legend()
    fig.autofmt_xdate(rotation=30)
    durations_path = out_dir / "durations.png"
    fig.savefig(durations_path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(durations_path)

    counts = {sid: 0 for sid in graph.states}
    for report in reports:
        for sid in report.visited_states:
            if sid in counts:
                counts[sid] += 1
    fig, ax = plt.subplots(figsize=(9, 4.5))
    states = list(counts)
    ax.bar(states, [counts[s] for s in states],
           color=["#4878a8" if counts[s] else "#b04040" for s in states])
    ax.set_ylabel("personas visiting")
    ax.set_title("State coverage across the persona pack")
    ax.set_yticks(range(0, len(reports) + 1))
    fig.autofmt_xdate(rotation=60)
    coverage_path = out_dir / "coverage.png"
    fig.savefig(coverage_path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(coverage_path)

    return written


def write_junit(reports: list[SimReport], coverage: CoverageReport,
                path: str | Path) -> Path:
    """One testcase per persona (clean end, no breakdown, within budget)
    plus a pack-level full-coverage testcase."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    suite = ET.Element("testsuite", name="persona-pack")
    failures = 0
    for report in reports:
        case = ET.SubElement(suite, "testcase", classname="persona",
                             name=report.persona_id)
        problems = []
        if report.breakdown:
            problems.append(f"breakdown: {report.breakdown}")
        if not report.ended_cleanly:
            problems.append("did not end cleanly")
        if report.estimated_duration_s > TEN_MINUTE_BUDGET_S:
            problems.append(
                f"duration {report.estimated_duration_s:.1f}s over budget")
        if problems:
            failures += 1
            failure = ET.SubElement(case, "failure", message="; ".join(problems))
            failure.text = "; ".join(problems)

    case = ET.SubElement(suite, "testcase", classname="pack", name="state_coverage")
    if coverage.state_coverage < 1.0:
        failures += 1
        failure = ET.SubElement(
            case, "failure",
            message=f"coverage {coverage.state_coverage:.2f}, "
                    f"uncovered: {', '.join(coverage.uncovered)}")
        failure.text = failure.get("message")

    suite.set("tests", str(len(reports) + 1))
    suite.set("failures", str(failures))
    ET.ElementTree(suite).write(path, encoding="utf-8", xml_declaration=True)
    return path

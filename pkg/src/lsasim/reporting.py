"""Run output files: KPI CSV, evacuation ledger, summary/manifest JSON, traces.

Every file starts from the same provenance (scenario hash, seed, version) so
two runs of the same (scenario, seed) are byte-identical.
"""

import hashlib
import json
import math
import os
from typing import Optional

from .simulation import RunResult

KPI_COLUMNS = [
    "window_end_tti",
    "operator",
    "goodput_bps",
    "sla_baseline_bps",
    "outage_ratio",
    "mean_sinr_db",
    "handover_count",
    "evac_count",
    "evac_violations",
]


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _provenance_line(scenario_sha256: str, seed: int, tool_version: str) -> str:
    return f"# scenario_sha256={scenario_sha256} seed={seed} tool_version={tool_version}\n"


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.6f}"
    return str(value)


def write_outputs(
    result: RunResult,
    out_dir: str,
    scenario_path: str,
    scenario_sha256: str,
    tool_version: str,
    trace_lines: Optional[list[str]] = None,
    coverage_map=None,
) -> dict:
    """Write all report files into out_dir and return the summary dict."""
    os.makedirs(out_dir, exist_ok=True)
    prov = _provenance_line(scenario_sha256, result.seed, tool_version)

    kpi_path = os.path.join(out_dir, "kpi.csv")
    rows = result.metrics.kpi_rows(result.sim.baselines_bps)
    with open(kpi_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(prov)
        f.write(",".join(KPI_COLUMNS) + "\n")
        for row in rows:
            f.write(",".join(_fmt(row[c]) for c in KPI_COLUMNS) + "\n")

    ledger_path = os.path.join(out_dir, "evac_ledger.csv")
    with open(ledger_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(prov)
        f.write("grant_id,ordered_at,deadline,confirmed_at,compliant\n")
        for rec in result.controller.evacuation_ledger:
            f.write(
                f"{rec.grant_id},{rec.ordered_at},{rec.deadline},{rec.confirmed_at},"
                f"{str(rec.compliant).lower()}\n"
            )

    summary = result.summary_dict(scenario_sha256, tool_version)
    summary_path = os.path.join(out_dir, "summary.json")
    with open(summary_path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")

    manifest = {
        "scenario_path": scenario_path,
        "scenario_sha256": scenario_sha256,
        "seed": result.seed,
        "tool_version": tool_version,
        "output_dir": os.path.abspath(out_dir),
        "files": ["kpi.csv", "evac_ledger.csv", "summary.json"],
    }
    if coverage_map is not None:
        cov_path = os.path.join(out_dir, "coverage_map.csv")
        with open(cov_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(prov)
            f.write("tti,grid_x,grid_y,channel_id,interference_dbm\n")
            for tti, gx, gy, ch, dbm in coverage_map.snapshot_rows(result.scenario.horizon_ttis):
                f.write(f"{tti},{gx},{gy},{ch},{dbm:.6f}\n")
        manifest["files"].append("coverage_map.csv")
    if trace_lines is not None:
        trace_path = os.path.join(out_dir, "trace.log")
        with open(trace_path, "w", encoding="utf-8", newline="\n") as f:
            for line in trace_lines:
                f.write(line + "\n")
        manifest["files"].append("trace.log")

    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return summary


class SchemaMismatch(Exception):
    pass


def compare_runs(dir_a: str, dir_b: str, metric: str, relation: str, tolerance: float) -> dict:
    """Evaluate `a <relation> b` on a dotted summary metric with tolerance.

    relation "ge" passes iff a >= b*(1-tol); "le" passes iff a <= b*(1+tol).
    """
    values = []
    schemas = []
    for d in (dir_a, dir_b):
        path = os.path.join(d, "summary.json")
        if not os.path.exists(path):
            raise SchemaMismatch(f"missing summary.json under {d}")
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
        schemas.append(doc.get("schema_version"))
        node = doc
        for part in metric.split("."):
            if not isinstance(node, dict) or part not in node:
                raise SchemaMismatch(f"metric {metric!r} not present in {path}")
            node = node[part]
        if not isinstance(node, (int, float)) or isinstance(node, bool):
            raise SchemaMismatch(f"metric {metric!r} is not numeric in {path}")
        values.append(float(node))
    if schemas[0] != schemas[1]:
        raise SchemaMismatch(f"schema versions differ: {schemas[0]} vs {schemas[1]}")
    a, b = values
    if relation == "ge":
        passed = a >= b * (1.0 - tolerance)
    elif relation == "le":
        passed = a <= b * (1.0 + tolerance)
    else:
        raise ValueError(f"relation must be 'ge' or 'le', got {relation!r}")
    return {"a": a, "b": b, "metric": metric, "relation": relation, "tolerance": tolerance, "pass": passed}

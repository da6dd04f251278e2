"""Command-line front end.

Exit codes: 0 on success, 1 for input problems (missing or malformed
files, unknown names, bad parameters), 2 when a metric is mathematically
undefined on valid input (for example a non-positive available-power
balance).  All outputs are deterministic for fixed inputs and seed; no
timestamps are written.
"""

from __future__ import annotations

import csv
import functools
import json
import sys
from dataclasses import replace
from pathlib import Path

import click

from . import catalog as cat
from . import graphmetrics, performance, scoremetrics
from .errors import ComputationError, ValidationError
from .hydraulics import classify_states, load_series, save_series
from .network import load_network
from .scenario import MC_METRICS, apply_scenario, load_scenario, monte_carlo

DEFAULT_THRESHOLD = 1.0


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        except ComputationError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)

    return wrapper


def _need(value, flag: str):
    if value is None:
        raise ValidationError(f"this metric requires {flag}")
    return value


def _write_json(payload: dict, out: str | None):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


@click.group()
def main():
    """Resilience analytics for water distribution networks."""


# ---------------------------------------------------------------------------
# metric
# ---------------------------------------------------------------------------

def _metric_todini(opts) -> dict:
    net = load_network(_need(opts["network"], "--network"), units=opts["units"])
    series = load_series(_need(opts["series"], "--series"))
    return performance.todini_index(net, series).to_dict()


def _metric_zhuang(opts) -> dict:
    series = load_series(_need(opts["series"], "--series"))
    return performance.zhuang_availability(series).to_dict()


def _metric_hashimoto(opts) -> dict:
    series = load_series(_need(opts["series"], "--series"))
    states = classify_states(series, opts["threshold"], per_node=opts["per_node"])
    result = performance.hashimoto_recovery(states).to_dict()
    result["states"] = "".join(states.states)
    return result


def _metric_flow_resilience(opts) -> dict:
    net = load_network(_need(opts["network"], "--network"), units=opts["units"])
    series = load_series(_need(opts["series"], "--series"))
    return performance.flow_based_resilience(net, series).to_dict()


def _metric_user_severity(opts) -> dict:
    series = load_series(_need(opts["series"], "--series"))
    node = _need(opts["node"], "--node")
    return performance.user_severity(series, node).to_dict()


def _metric_herrera(opts) -> dict:
    net = load_network(_need(opts["network"], "--network"), units=opts["units"])
    rows = graphmetrics.node_index_table(net, k=opts["k"])
    if opts["nodes_out"]:
        with open(opts["nodes_out"], "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["node_id", "I", "weighted_I"])
            for node_id, index, weighted in rows:
                writer.writerow([node_id, repr(index), repr(weighted)])
    aggregate = graphmetrics.trimmed_mean_index(
        [index for _, index, _ in rows], opts["trim"]
    )
    return {
        "name": "herrera_trimmed_index",
        "value": aggregate,
        "nominal_range": None,
        "warnings": [],
        "inputs_digest": net.digest(),
        "k": opts["k"],
        "trim_fraction": opts["trim"],
        "nodes": {node_id: index for node_id, index, _ in rows},
    }


def _metric_buffering(opts) -> dict:
    net = load_network(_need(opts["network"], "--network"), units=opts["units"])
    if opts["threshold_given"]:
        oracle = performance.supply_feasibility(net, opts["threshold"])
        criterion = f"supply ratio >= {opts['threshold']}"
    else:
        oracle = performance.connectivity_feasibility(net)
        criterion = "all junctions connected to a source"
    k = performance.buffering_capacity(net, oracle, max_k=opts["max_k"])
    return {
        "name": "buffering_capacity",
        "value": k,
        "nominal_range": [0, opts["max_k"]],
        "warnings": [],
        "inputs_digest": net.digest(),
        "feasibility": criterion,
    }


def _metric_balaei(opts) -> dict:
    indicators = scoremetrics.load_indicators(_need(opts["indicators"], "--indicators"))
    value = scoremetrics.balaei_aggregate(indicators)
    return {
        "name": "balaei_aggregate",
        "value": value,
        "nominal_range": [0.0, 1.0],
        "warnings": [],
        "inputs_digest": "",
        "indicators": [i.name for i in indicators],
    }


def _metric_wpr(opts) -> dict:
    checklist = scoremetrics.load_checklist(opts["checklist"])
    answers = scoremetrics.load_answers(_need(opts["answers"], "--answers"))
    score = scoremetrics.wpr_score(checklist, answers)
    return {
        "name": "wpr_score",
        "value": score,
        "nominal_range": [0, checklist.total],
        "warnings": [],
        "inputs_digest": "",
        "total_criteria": checklist.total,
    }


METRIC_RUNNERS = {
    "todini": _metric_todini,
    "zhuang": _metric_zhuang,
    "hashimoto": _metric_hashimoto,
    "flow_resilience": _metric_flow_resilience,
    "user_severity": _metric_user_severity,
    "herrera": _metric_herrera,
    "buffering": _metric_buffering,
    "balaei": _metric_balaei,
    "wpr": _metric_wpr,
}

# implemented metric -> (catalog record name, citation key)
METRIC_CATALOG_ROWS = {
    "todini": ("resilience index", "Todini 2000"),
    "zhuang": ("integral waterservice availability", "Zhuang 2013"),
    "hashimoto": ("system's average recovery rate", "Hashimoto 1982"),
    "flow_resilience": ("Flow-Based Resilience Metric", "Farahmandfar 2018"),
    "user_severity": ("user severity", "Huizar 2018"),
    "herrera": ("resilience index", "Herrera 2016"),
    "buffering": ("buffering capacity", "Altherr 2018"),
    "balaei": ("water supply system seismic resilience indicator", "Balaei 2018"),
    "wpr": ("water provision resilience", "Milman 2008"),
}


@main.command(name="metric")
@click.argument("name")
@click.option("--network", help="Network JSON file.")
@click.option("--series", help="Hydraulic series CSV file.")
@click.option("--node", help="Node id (user_severity).")
@click.option("--threshold", type=float, default=None,
              help=f"Service threshold in (0, 1]; default {DEFAULT_THRESHOLD}.")
@click.option("--per-node", is_flag=True, help="Per-node thresholding (hashimoto).")
@click.option("--K", "k", type=int, default=graphmetrics.DEFAULT_K,
              help="Number of shortest paths (herrera).")
@click.option("--trim", type=float, default=graphmetrics.DEFAULT_TRIM,
              help="Trim fraction per tail for the aggregate (herrera).")
@click.option("--max-k", type=int, default=2, help="Search depth (buffering).")
@click.option("--indicators", help="Indicator CSV (balaei).")
@click.option("--checklist", help="Checklist JSON (wpr); defaults to the bundled file.")
@click.option("--answers", help="Answers JSON (wpr).")
@click.option("--nodes-out", help="Per-node index CSV output (herrera).")
@click.option("--units", type=click.Choice(["lps", "m3s"]), default=None,
              help="Override flow units of the network file.")
@click.option("--out", help="Write the JSON report here instead of stdout.")
@_guarded
def metric_cmd(name, **opts):
    """Compute one named metric and emit a JSON report."""
    if name not in METRIC_RUNNERS:
        raise ValidationError(
            f"unknown metric {name!r}; valid names: {', '.join(sorted(METRIC_RUNNERS))}"
        )
    opts["threshold_given"] = opts["threshold"] is not None
    if opts["threshold"] is None:
        opts["threshold"] = DEFAULT_THRESHOLD
    payload = METRIC_RUNNERS[name](opts)
    _write_json(payload, opts["out"])
    if opts["out"]:
        click.echo(f"{payload['name']} = {payload['value']}")


# ---------------------------------------------------------------------------
# scenario
# ---------------------------------------------------------------------------

@main.group()
def scenario():
    """Run critical-event scenarios against a network."""


@scenario.command(name="run")
@click.option("--network", required=True, help="Network JSON file.")
@click.option("--spec", "spec_path", required=True, help="Scenario JSON file.")
@click.option("--horizon", type=int, default=None, help="Timestep count override.")
@click.option("--seed", type=int, default=None, help="Seed override.")
@click.option("--units", type=click.Choice(["lps", "m3s"]), default=None)
@click.option("--out", help="Write the resulting series CSV here.")
@_guarded
def scenario_run(network, spec_path, horizon, seed, units, out):
    """Apply a scenario and print per-step supply ratios."""
    net = load_network(network, units=units)
    spec = load_scenario(spec_path)
    if seed is not None:
        spec = replace(spec, seed=seed)
    series = apply_scenario(net, spec, horizon=horizon)
    if out:
        save_series(series, out)
    for t in range(series.n_steps):
        delivered = float(series.delivered[t].sum())
        demand = float(series.demand[t].sum())
        click.echo(f"t={t} delivered={delivered:.6g} demand={demand:.6g} "
                   f"ratio={series.system_ratio(t):.6g}")


@scenario.command(name="mc")
@click.option("--network", required=True, help="Network JSON file.")
@click.option("--spec", "spec_path", required=True, help="Scenario JSON file.")
@click.option("--n", type=int, required=True, help="Replicate count.")
@click.option("--metric", "metric_name", required=True,
              help=f"Metric per replicate: {', '.join(sorted(MC_METRICS))}.")
@click.option("--horizon", type=int, default=None)
@click.option("--seed", type=int, default=None, help="Seed override.")
@click.option("--threshold", type=float, default=DEFAULT_THRESHOLD,
              help="Service threshold for state-based metrics.")
@click.option("--workers", type=int, default=1)
@click.option("--exhaustive", is_flag=True,
              help="Enumerate failure sets in order instead of sampling.")
@click.option("--units", type=click.Choice(["lps", "m3s"]), default=None)
@click.option("--replicates-csv", help="Write per-replicate values here.")
@click.option("--out", help="Write the JSON report here instead of stdout.")
@_guarded
def scenario_mc(network, spec_path, n, metric_name, horizon, seed, threshold,
                workers, exhaustive, units, replicates_csv, out):
    """Monte Carlo evaluation of a metric over scenario replicates."""
    net = load_network(network, units=units)
    spec = load_scenario(spec_path)
    if seed is not None:
        spec = replace(spec, seed=seed)
    result = monte_carlo(
        net, spec, n, metric_name, horizon=horizon, workers=workers,
        exhaustive=exhaustive, threshold=threshold,
    )
    if replicates_csv:
        with open(replicates_csv, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["replicate", "value"])
            for r, value in enumerate(result.values):
                writer.writerow([r, repr(value)])
    _write_json(result.to_dict(), out)
    if out:
        click.echo(f"{metric_name}: mean={result.summary['mean']:.6g} over n={result.n}")


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

@main.group(name="catalog")
def catalog_group():
    """Meta-analysis of the bundled metric categorisation dataset."""


@catalog_group.command(name="counts")
@click.option("--catalog", "catalog_path", default=None, help="Alternative catalog CSV.")
@click.option("--out", help="Write the JSON summary here.")
@_guarded
def catalog_counts(catalog_path, out):
    """Per-category counts and multiplicity histograms."""
    records = cat.load_catalog(catalog_path)
    summary = cat.summary_counts(records)
    click.echo(f"records: {summary.total}")
    for code in cat.FLAG_COLUMNS:
        share = summary.flag_shares[code]
        click.echo(f"  {code:>2}: {summary.flag_counts[code]:>3}  ({share:.0%})")
    click.echo("functions per metric: " + ", ".join(
        f"{k}->{v}" for k, v in summary.function_histogram.items()))
    click.echo("properties per metric: " + ", ".join(
        f"{k}->{v}" for k, v in summary.property_histogram.items()))
    if out:
        _write_json(summary.to_dict(), out)


@catalog_group.command(name="correlate")
@click.option("--catalog", "catalog_path", default=None, help="Alternative catalog CSV.")
@click.option("--out", help="Write the matrix CSV here.")
@_guarded
def catalog_correlate(catalog_path, out):
    """Pearson correlation matrix of the category flags."""
    records = cat.load_catalog(catalog_path)
    matrix = cat.pearson_matrix(records)
    text = matrix.to_csv()
    if out:
        Path(out).write_text(text)
        click.echo(f"wrote {len(matrix.labels)}x{len(matrix.labels)} matrix to {out}")
    else:
        click.echo(text, nl=False)
    if matrix.undefined_labels:
        click.echo(
            f"warning: zero-variance columns {sorted(matrix.undefined_labels)}", err=True
        )


@catalog_group.command(name="cluster")
@click.option("--catalog", "catalog_path", default=None, help="Alternative catalog CSV.")
@click.option("--k", type=int, default=5, help="Cluster count.")
@click.option("--out", help="Write the label CSV here.")
@_guarded
def catalog_cluster(catalog_path, k, out):
    """Ward clustering of the catalog flags."""
    records = cat.load_catalog(catalog_path)
    result = cat.ward_clustering(records, k=k)
    agreement = cat.reference_agreement(records, result)
    if out:
        with open(out, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["metric", "citation", "cluster", "reference_cluster"])
            for record, label in zip(records, result.labels):
                writer.writerow([record.name, record.citation, label, record.cluster])
    else:
        for record, label in zip(records, result.labels):
            click.echo(f"{label}  {record.name}")
    click.echo(f"agreement with reference labels: {agreement:.4f}")


@catalog_group.command(name="dendrogram")
@click.option("--catalog", "catalog_path", default=None, help="Alternative catalog CSV.")
@click.option("--k", type=int, default=5, help="Cluster count for the flat labels.")
@click.option("--out", required=True, help="Write the JSON tree here.")
@click.option("--text", is_flag=True, help="Also write a plain-text render (.txt).")
@_guarded
def catalog_dendrogram(catalog_path, k, out, text):
    """Export the full merge tree."""
    records = cat.load_catalog(catalog_path)
    result = cat.ward_clustering(records, k=k)
    cat.dendrogram_export(result, out, text=text)
    click.echo(f"wrote {len(result.merges)} merges to {out}")


@main.command(name="list-metrics")
@click.option("--catalog", "catalog_path", default=None, help="Alternative catalog CSV.")
@_guarded
def list_metrics(catalog_path):
    """Implemented metrics with their catalog categorisation."""
    records = cat.load_catalog(catalog_path)
    for name in sorted(METRIC_RUNNERS):
        row_name, citation = METRIC_CATALOG_ROWS[name]
        record = cat.find_record(records, row_name, citation)
        flags = ",".join(c for c in cat.FLAG_COLUMNS if record.flag(c))
        click.echo(f"{name:<16} {row_name} ({citation}): {flags}; cluster {record.cluster}")


if __name__ == "__main__":
    main()

"""Command-line front end.

Reports are JSON (canonical, byte-stable for a fixed config) or a CSV
projection of the main table. Progress goes to stderr; reports go to
--out or stdout. Exit codes: 2 config error, 3 data validation error,
4 runtime failure.
"""

import csv
import dataclasses
import enum
import io
import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .data import TaskKind, dataset_summary, load_csv, load_manifest, order_versions, parse_positive_rule
from .errors import BellwetherError, ConfigError, DataValidationError
from .forest import ForestParams, strategy_names
from .pipeline import (
    PairEvaluation,
    compare_within_vs_bellwether,
    discover,
    incremental_sufficiency,
    monitor,
    source_instability_report,
    transfer,
    win_tie_loss,
)
from .stats import SampleSet, TestConfig, scott_knott

SCHEMA_VERSION = 1


def to_jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def _parse_ratio(text: str):
    try:
        pos, neg = text.split(":")
        return (int(pos), int(neg))
    except ValueError:
        raise ConfigError(f"cannot parse ratio {text!r}; expected POS:NEG like 1:2") from None


def _emit(report: dict, fmt: str, out: str | None, csv_table):
    if fmt == "json":
        payload = json.dumps(report, indent=2, sort_keys=True) + "\n"
    else:
        fieldnames, rows = csv_table
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
        payload = buf.getvalue()
    if out:
        Path(out).write_text(payload, encoding="utf-8")
        # timestamps live only in the sidecar so reports stay byte-comparable
        sidecar = {"written_at": __import__("datetime").datetime.now().isoformat()}
        Path(str(out) + ".meta.json").write_text(json.dumps(sidecar), encoding="utf-8")
        click.echo(f"report written to {out}", err=True)
    else:
        click.echo(payload, nl=False)


def _envelope(command: str, config: dict, result) -> dict:
    # worker count never affects results, so keep it out of the report
    config = {k: v for k, v in config.items() if k != "workers"}
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": command,
        "config": to_jsonable(config),
        "result": to_jsonable(result),
    }


def _run_guard(fn):
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(2)
        except DataValidationError as exc:
            click.echo(f"data error: {exc}", err=True)
            sys.exit(3)
        except BellwetherError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(4)
        except click.exceptions.ClickException:
            raise
        except Exception as exc:  # noqa: BLE001
            click.echo(f"runtime failure: {exc}", err=True)
            sys.exit(4)

    return wrapper


def common_options(fn):
    fn = click.option("--repeats", default=30, show_default=True, type=int)(fn)
    fn = click.option("--seed", default=0, show_default=True, type=int)(fn)
    fn = click.option("--strategy", default="direct", show_default=True)(fn)
    fn = click.option("--ratio", default="1:2", show_default=True, help="pos:neg rebalance ratio")(fn)
    fn = click.option("--confidence", default=0.99, show_default=True, type=float)(fn)
    fn = click.option("--effect-threshold", default=0.6, show_default=True, type=float)(fn)
    fn = click.option("--bootstrap", default=512, show_default=True, type=int)(fn)
    fn = click.option("--workers", default=os.cpu_count() or 1, show_default=True, type=int)(fn)
    fn = click.option("--trees", default=100, show_default=True, type=int)(fn)
    fn = click.option("--format", "fmt", default="json", show_default=True,
                      type=click.Choice(["json", "csv"]))(fn)
    fn = click.option("--out", default=None, help="report file (default stdout)")(fn)
    return fn


def _resolve(repeats, seed, strategy, ratio, confidence, effect_threshold, bootstrap,
             workers, trees):
    if repeats < 1:
        raise ConfigError("repeats must be >= 1")
    if strategy not in strategy_names():
        raise ConfigError(
            f"unknown strategy {strategy!r}; registered: {', '.join(strategy_names())}"
        )
    cfg = TestConfig(
        bootstrap_resamples=bootstrap,
        confidence=confidence,
        a12_threshold=effect_threshold,
        seed=seed,
    )
    params = ForestParams(n_trees=trees, seed=seed)
    return {
        "repeats": repeats,
        "seed": seed,
        "strategy": strategy,
        "ratio": _parse_ratio(ratio),
        "cfg": cfg,
        "params": params,
        "workers": workers,
    }


@click.group()
@click.version_option(__version__)
def main():
    """Bellwether discovery, transfer baselines, and ranking statistics."""


@main.command()
@click.option("--manifest", required=True, type=click.Path())
@_run_guard
def validate(manifest):
    """Check a manifest's datasets without training anything."""
    path = Path(manifest)
    if not path.is_file():
        raise ConfigError(f"no such manifest: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    task = TaskKind(doc.get("task", "classification"))
    rule = doc.get("positive_rule", "> 0")
    if task is TaskKind.CLASSIFICATION:
        parse_positive_rule(rule)
    ok = True
    loaded = []
    for entry in doc.get("datasets", []):
        try:
            ds = load_csv(
                path.parent / entry["path"],
                positive_rule=rule,
                class_column=doc.get("class_column"),
                task=task,
                name=entry.get("name"),
                version=entry.get("version"),
            )
        except (DataValidationError, ConfigError) as exc:
            click.echo(f"FAIL {entry.get('name', '?')}: {exc}")
            ok = False
            continue
        loaded.append(ds)
        summary = dataset_summary(ds)
        line = f"OK {ds.name}: rows={summary['rows']}, attributes={summary['attributes']}"
        if task is TaskKind.CLASSIFICATION:
            line += f", positive {summary['positive_pct']:.1f}%"
        if summary["duplicate_rows"]:
            line += f", duplicate_rows={summary['duplicate_rows']}"
        if summary["constant_columns"]:
            line += f", constant_columns={summary['constant_columns']}"
        click.echo(line)
    if loaded:
        ref = loaded[0]
        for ds in loaded[1:]:
            odd = sorted(set(ds.attributes) ^ set(ref.attributes))
            if odd:
                click.echo(f"SCHEMA MISMATCH {ds.name}: differs on {', '.join(odd)}")
                ok = False
    if not ok:
        sys.exit(3)


@main.command("discover")
@click.option("--manifest", required=True, type=click.Path())
@common_options
@_run_guard
def discover_cmd(manifest, fmt, out, **opts):
    """Find a community's bellwether with the round-robin protocol."""
    resolved = _resolve(**opts)
    community = load_manifest(manifest)
    click.echo(f"discovering bellwether for {community.name!r} "
               f"({len(community)} datasets, {resolved['repeats']} repeats)", err=True)
    report = discover(
        community,
        repeats=resolved["repeats"],
        seed=resolved["seed"],
        cfg=resolved["cfg"],
        params=resolved["params"],
        strategy=resolved["strategy"],
        ratio=resolved["ratio"],
        workers=resolved["workers"],
    )
    rows = [
        {
            "holdout": h.holdout,
            "bellwethers": "|".join(h.bellwethers),
            "pooled_median": h.pooled_median,
            "pooled_iqr": h.pooled_iqr,
            "holdout_median": h.holdout_median,
            "holdout_iqr": h.holdout_iqr,
        }
        for h in report.per_holdout
    ]
    _emit(
        _envelope("discover", resolved, report),
        fmt, out,
        (["holdout", "bellwethers", "pooled_median", "pooled_iqr",
          "holdout_median", "holdout_iqr"], rows),
    )


@main.command("transfer")
@click.option("--manifest", required=True, type=click.Path())
@click.option("--source", "source_name", required=True)
@click.option("--target", "target_name", required=True)
@common_options
@_run_guard
def transfer_cmd(manifest, source_name, target_name, fmt, out, **opts):
    """Apply a named bellwether dataset to a named target."""
    resolved = _resolve(**opts)
    community = load_manifest(manifest)
    by_name = {ds.name: ds for ds in community.datasets}
    for name in (source_name, target_name):
        if name not in by_name:
            raise ConfigError(f"dataset {name!r} not in manifest; has: {', '.join(sorted(by_name))}")
    ev = transfer(
        by_name[source_name], by_name[target_name],
        repeats=resolved["repeats"], seed=resolved["seed"],
        strategy=resolved["strategy"], params=resolved["params"],
        ratio=resolved["ratio"],
    )
    row = {
        "source": ev.source,
        "target": ev.target,
        "metric": ev.metric,
        "median": ev.scores.median,
        "iqr": ev.scores.iqr,
    }
    _emit(_envelope("transfer", resolved, ev), fmt, out,
          (list(row), [row]))


@main.command("monitor")
@click.option("--history", "history_path", required=True, type=click.Path(),
              help='JSON list of {"source","target","scores":[...]}')
@click.option("--baseline", "baseline_len", default=5, show_default=True, type=int)
@click.option("--recent", "recent_len", default=5, show_default=True, type=int)
@common_options
@_run_guard
def monitor_cmd(history_path, baseline_len, recent_len, fmt, out, **opts):
    """Check a bellwether's score history for degradation."""
    resolved = _resolve(**opts)
    path = Path(history_path)
    if not path.is_file():
        raise ConfigError(f"no such history file: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    history = []
    for i, entry in enumerate(doc):
        history.append(
            PairEvaluation(
                source=entry.get("source", "?"),
                target=entry.get("target", f"t{i}"),
                metric=entry.get("metric", "G"),
                scores=SampleSet(name=f"eval{i}", values=tuple(entry["scores"])),
            )
        )
    status = monitor(history, baseline_len, recent_len, resolved["cfg"])
    row = to_jsonable(status)
    _emit(_envelope("monitor", resolved, status), fmt, out, (list(row), [row]))


@main.command("rank")
@click.option("--samples", "samples_path", required=True, type=click.Path(),
              help="CSV whose columns are named sample distributions")
@click.option("--direction", default="higher", show_default=True,
              type=click.Choice(["higher", "lower"]))
@common_options
@_run_guard
def rank_cmd(samples_path, direction, fmt, out, **opts):
    """Scott-Knott-rank named sample columns from a CSV."""
    resolved = _resolve(**opts)
    path = Path(samples_path)
    if not path.is_file():
        raise ConfigError(f"no such samples file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames:
            raise ConfigError(f"{path}: no header row")
        columns = {name: [] for name in reader.fieldnames}
        for record in reader:
            for name, cell in record.items():
                if cell is not None and cell.strip():
                    columns[name].append(float(cell))
    samples = [SampleSet(name=n, values=tuple(v)) for n, v in columns.items()]
    ranking = scott_knott(samples, resolved["cfg"], direction=direction)
    medians = {s.name: s.median for s in samples}
    rows = [
        {"rank": rank, "name": name, "median": medians[name]}
        for rank, members in ranking.groups
        for name in members
    ]
    _emit(_envelope("rank", resolved, ranking), fmt, out,
          (["rank", "name", "median"], rows))


@main.command("compare-methods")
@click.option("--contexts", "contexts_path", required=True, type=click.Path(),
              help='JSON list of {"context": id, "methods": {name: [scores]}}')
@common_options
@_run_guard
def compare_methods_cmd(contexts_path, fmt, out, **opts):
    """Win/Tie/Loss tabulation of competing methods across contexts."""
    resolved = _resolve(**opts)
    path = Path(contexts_path)
    if not path.is_file():
        raise ConfigError(f"no such contexts file: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    contexts = [
        {
            "context": entry.get("context", i),
            "samples": [
                SampleSet(name=m, values=tuple(v))
                for m, v in sorted(entry["methods"].items())
            ],
        }
        for i, entry in enumerate(doc)
    ]
    table = win_tie_loss(contexts, resolved["cfg"])
    rows = [to_jsonable(w) for w in table]
    _emit(_envelope("compare-methods", resolved, table), fmt, out,
          (["method", "wins", "ties", "losses"], rows))


@main.command("within-vs-bellwether")
@click.option("--manifest", required=True, type=click.Path())
@common_options
@_run_guard
def within_cmd(manifest, fmt, out, **opts):
    """Bellwether data vs each project's own previous version."""
    resolved = _resolve(**opts)
    community = load_manifest(manifest)
    rows = compare_within_vs_bellwether(
        community, repeats=resolved["repeats"], seed=resolved["seed"],
        cfg=resolved["cfg"], params=resolved["params"],
        strategy=resolved["strategy"], ratio=resolved["ratio"],
    )
    flat = [
        {
            "project": r["project"],
            "bellwether": r["bellwether"],
            "bellwether_median": r["bellwether_median"],
            "local_median": r["local_median"],
            "winner": r["winner"],
        }
        for r in rows
    ]
    _emit(_envelope("within-vs-bellwether", resolved, rows), fmt, out,
          (["project", "bellwether", "bellwether_median", "local_median", "winner"], flat))


@main.command("incremental")
@click.option("--manifest", required=True, type=click.Path())
@click.option("--project", "project_name", required=True,
              help="versioned project whose history is studied")
@common_options
@_run_guard
def incremental_cmd(manifest, project_name, fmt, out, **opts):
    """How many bellwether versions are enough?"""
    resolved = _resolve(**opts)
    community = load_manifest(manifest)
    versions = [ds for ds in community.datasets if ds.name == project_name]
    if not versions:
        raise ConfigError(f"project {project_name!r} not in manifest")
    versions = list(reversed(order_versions(versions)))  # newest first
    targets = [ds for ds in community.datasets if ds.name != project_name]
    result = incremental_sufficiency(
        versions, targets, repeats=resolved["repeats"], seed=resolved["seed"],
        cfg=resolved["cfg"], params=resolved["params"],
        strategy=resolved["strategy"], ratio=resolved["ratio"],
    )
    rows = [
        {"target": r["target"], "smallest_sufficient": r["smallest_sufficient"]}
        for r in result["per_target"]
    ]
    _emit(_envelope("incremental", resolved, result), fmt, out,
          (["target", "smallest_sufficient"], rows))


@main.command("instability")
@click.option("--manifest", required=True, type=click.Path())
@click.option("--top-k", default=5, show_default=True, type=int)
@click.option("--bellwether", "bellwether_name", default=None)
@common_options
@_run_guard
def instability_cmd(manifest, top_k, bellwether_name, fmt, out, **opts):
    """Top-k feature importances per source dataset."""
    resolved = _resolve(**opts)
    community = load_manifest(manifest)
    rows = source_instability_report(
        community, params=resolved["params"], seed=resolved["seed"],
        k=top_k, bellwether=bellwether_name, ratio=resolved["ratio"],
    )
    flat = [
        {
            "source": r["source"],
            "is_bellwether": r["is_bellwether"],
            "top_features": "|".join(f"{a}:{s:.4f}" for a, s in r["top_features"]),
        }
        for r in rows
    ]
    _emit(_envelope("instability", resolved, rows), fmt, out,
          (["source", "is_bellwether", "top_features"], flat))


if __name__ == "__main__":
    main()

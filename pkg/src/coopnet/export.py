"""Writers for sweep tables, per-generation series, networks and run metadata.

All files are UTF-8, newline-terminated, with a fixed column order.
"""
from __future__ import annotations

import csv
import json
import statistics
from contextlib import contextmanager
from pathlib import Path
from typing import Mapping

from .errors import ExportError
from .harness import MetricsSeries, SweepResult
from .net import Network

SWEEP_COLUMNS = ("model", "attrition", "founder", "b", "replicate", "seed", "c_mean")
SERIES_COLUMNS = ("generation", "population", "cooperator_fraction", "mean_degree",
                  "removed_count", "added_count")


@contextmanager
def _open(path, mode="w"):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, mode, encoding="utf-8", newline="") as fh:
            yield fh
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_sweep_csv(result: SweepResult, path) -> None:
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in result.rows:
            w.writerow([r.model, r.attrition, r.founder, _fmt(r.b), r.replicate, r.seed,
                        _fmt(r.c_mean)])


def write_sweep_summary_csv(result: SweepResult, path) -> None:
    """Replicate mean and sample standard deviation per (variant, b)."""
    groups: dict[tuple, list[float]] = {}
    for r in result.rows:
        groups.setdefault((r.model, r.attrition, r.founder, r.b), []).append(r.c_mean)
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("model", "attrition", "founder", "b", "replicates", "c_mean", "c_std"))
        for key, vals in groups.items():
            std = statistics.stdev(vals) if len(vals) > 1 else 0.0
            w.writerow([*key[:3], _fmt(key[3]), len(vals), _fmt(statistics.fmean(vals)),
                        _fmt(std)])


def write_series_csv(series: MetricsSeries, path) -> None:
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_COLUMNS)
        for r in series.records:
            w.writerow([_fmt(getattr(r, c)) for c in SERIES_COLUMNS])


def write_edges_tsv(net: Network, path) -> None:
    with _open(path) as fh:
        for a, b in net.edges():
            fh.write(f"{a}\t{b}\n")


def write_nodes_tsv(net: Network, path, fitness: Mapping[int, float] | None = None) -> None:
    """``id<TAB>strategy<TAB>fitness`` in ascending id; strategy is C or D."""
    with _open(path) as fh:
        for node in net:
            f = 0.0 if fitness is None else float(fitness.get(node, 0.0))
            fh.write(f"{node}\t{net.strategy(node).letter}\t{_fmt(f)}\n")


def write_degrees_csv(hist: Mapping[int, int], path) -> None:
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("degree", "count"))
        for k in sorted(hist):
            w.writerow([k, hist[k]])


def write_meta_json(meta: Mapping, path) -> None:
    with _open(path) as fh:
        json.dump(meta, fh, indent=2, sort_keys=False)
        fh.write("\n")


def read_edges_tsv(path) -> list[tuple[int, int]]:
    with open(path, encoding="utf-8") as fh:
        return [tuple(int(x) for x in line.split("\t")) for line in fh if line.strip()]


def export_results(obj, fmt: str, path, **kwargs) -> None:
    """Dispatch on object type and format name.

    ``fmt`` is one of ``csv`` (sweep or series), ``edges``, ``nodes``,
    ``json`` (metadata mapping or a series' metadata).
    """
    fmt = fmt.lower()
    if fmt == "csv" and isinstance(obj, SweepResult):
        write_sweep_csv(obj, path)
    elif fmt == "csv" and isinstance(obj, MetricsSeries):
        write_series_csv(obj, path)
    elif fmt == "edges" and isinstance(obj, Network):
        write_edges_tsv(obj, path)
    elif fmt == "nodes" and isinstance(obj, Network):
        write_nodes_tsv(obj, path, kwargs.get("fitness"))
    elif fmt == "json" and isinstance(obj, MetricsSeries):
        write_meta_json(obj.metadata, path)
    elif fmt == "json" and isinstance(obj, Mapping):
        write_meta_json(obj, path)
    else:
        raise ValueError(f"cannot export {type(obj).__name__} as {fmt!r}")

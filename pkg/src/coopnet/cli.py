"""Command line entry point: ``coopnet run | sweep | degrees``.

Settings resolve as built-in defaults < ``--config`` file < flags. The
config file is flat ``key = value`` text using the flag names (dashes or
underscores). ``COOPNET_OUT`` sets the default output directory.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import export
from .errors import CoopnetError, InvalidConfigError
from .game import score_all
from .harness import (SimConfig, Variant, b_grid, make_config, mean_final_cooperation,
                      parse_variants, run_simulation, run_sweep)
from .net import degree_distribution

log = logging.getLogger("coopnet")

OUT_ENV = "COOPNET_OUT"

DEFAULTS = {
    "model": "cra",
    "attrition": "off",
    "founder": "d",
    "b": 1.3,
    "seed": 0,
    "generations": 2000,
    "max_size": 1000,
    "founder_size": 3,
    "m": 2,
    "epsilon": 0.99,
    "x_percent": 2.5,
    "tournament_frac": 0.01,
    "nodes_per_gen": 10,
    "window": 20,
    "split_components": "off",
    "snapshot_every": 0,
    "b_min": 1.0,
    "b_max": 3.0,
    "b_step": 0.1,
    "replicates": 10,
    "variants": "all",
    "workers": 1,
}

TYPES = {
    "b": float, "seed": int, "generations": int, "max_size": int, "founder_size": int,
    "m": int, "epsilon": float, "x_percent": float, "tournament_frac": float,
    "nodes_per_gen": int, "window": int, "snapshot_every": int, "b_min": float,
    "b_max": float, "b_step": float, "replicates": int, "workers": int,
}


def read_config_file(path) -> dict:
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InvalidConfigError(f"cannot read config {path}: {exc}") from exc
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfigError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in DEFAULTS and key != "out":
            raise InvalidConfigError(f"{path}:{n}: unknown key {key!r}")
        out[key] = value
    return out


def _on(text) -> bool:
    t = str(text).strip().lower()
    if t in ("on", "true", "yes", "1", "+"):
        return True
    if t in ("off", "false", "no", "0", "-"):
        return False
    raise InvalidConfigError(f"expected on/off, got {text!r}")


def resolve(args: argparse.Namespace) -> dict:
    settings = dict(DEFAULTS)
    settings["out"] = os.environ.get(OUT_ENV, "results")
    if getattr(args, "config", None):
        settings.update(read_config_file(args.config))
    for key, value in vars(args).items():
        if value is not None and key in settings:
            settings[key] = value
    for key, typ in TYPES.items():
        try:
            settings[key] = typ(settings[key])
        except (TypeError, ValueError):
            raise InvalidConfigError(f"{key}: cannot parse {settings[key]!r}") from None
    return settings


def config_from(s: dict) -> SimConfig:
    cfg = make_config(
        s["model"], _on(s["attrition"]), s["founder"], s["b"],
        seed=s["seed"], generations=s["generations"], max_size=s["max_size"],
        founder_size=s["founder_size"], m=s["m"], epsilon=s["epsilon"],
        nodes_per_generation=s["nodes_per_gen"], x_percent=s["x_percent"],
        tournament_fraction=s["tournament_frac"],
        remove_split_components=_on(s["split_components"]),
        averaging_window=s["window"], snapshot_every=s["snapshot_every"],
    )
    cfg.validate()
    return cfg


def cell_name(cfg: SimConfig) -> str:
    tag = Variant(cfg.model.kind, cfg.attrition_on, cfg.founder_strategy).tag
    return f"{tag}_b{cfg.game.b:g}_s{cfg.seed}"


def _single_run(s: dict):
    cfg = config_from(s)
    out = Path(s["out"])
    series, net = run_simulation(cfg)
    name = cell_name(cfg)
    final_fit = score_all(net, cfg.game)
    meta = dict(series.metadata)
    if len(series) >= cfg.averaging_window:
        meta["c_mean"] = mean_final_cooperation(series, cfg.averaging_window)
    meta["final"] = {"population": net.population, "edges": net.n_edges,
                     "mean_degree": net.mean_degree()}
    export.write_series_csv(series, out / f"series_{name}.csv")
    export.write_edges_tsv(net, out / f"edges_{name}.tsv")
    export.write_nodes_tsv(net, out / f"nodes_{name}.tsv", final_fit)
    export.write_meta_json(meta, out / f"meta_{name}.json")
    return cfg, series, net, name, meta


def cmd_run(s: dict) -> int:
    cfg, series, net, name, meta = _single_run(s)
    c = meta.get("c_mean")
    print(f"{name}\tpopulation={net.population}\tedges={net.n_edges}"
          f"\tc_mean={'' if c is None else f'{c:.6f}'}")
    return 0


def cmd_degrees(s: dict) -> int:
    cfg, series, net, name, _ = _single_run(s)
    out = Path(s["out"])
    hist = degree_distribution(net)
    export.write_degrees_csv(hist, out / f"degrees_{name}.csv")
    for k, snap in series.degree_snapshots.items():
        if k != len(series):
            export.write_degrees_csv(snap, out / f"degrees_{name}_g{k}.csv")
    print("degree\tcount")
    for k, v in hist.items():
        print(f"{k}\t{v}")
    if hist:
        print(f"# range\t{min(hist)}\t{max(hist)}")
    return 0


def cmd_sweep(s: dict) -> int:
    base = config_from(s)
    variants = parse_variants(s["variants"])
    bs = b_grid(s["b_min"], s["b_max"], s["b_step"])

    def progress(done, total):
        log.info("cell %d/%d", done, total)

    result = run_sweep(base, bs, s["replicates"], variants, workers=s["workers"],
                       progress=progress)
    out = Path(s["out"])
    export.write_sweep_csv(result, out / "sweep.csv")
    export.write_sweep_summary_csv(result, out / "sweep_summary.csv")
    meta = {"base": base.to_dict(), "b_values": bs, "replicates": s["replicates"],
            "variants": [v.tag for v in variants], "seed_rule":
            "blake2b-64(base_seed|variant|b in micro-units|replicate)"}
    from .harness import DESIGN
    meta["design"] = DESIGN
    export.write_meta_json(meta, out / "meta_sweep.json")
    for (tag, b), c in result.summary().items():
        print(f"{tag}\t{b:g}\t{c:.6f}")
    return 0


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value settings file")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./results)")
    p.add_argument("--seed", type=int)
    p.add_argument("--generations", type=int)
    p.add_argument("--max-size", dest="max_size", type=int)
    p.add_argument("--founder-size", dest="founder_size", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--x-percent", dest="x_percent", type=float)
    p.add_argument("--tournament-frac", dest="tournament_frac", type=float)
    p.add_argument("--nodes-per-gen", dest="nodes_per_gen", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--split-components", dest="split_components", choices=["on", "off"])
    p.add_argument("-v", "--verbose", action="store_true")


def _single(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=["epa", "cra"])
    p.add_argument("--attrition", choices=["on", "off"])
    p.add_argument("--founder", choices=["c", "d"])
    p.add_argument("--b", type=float)
    p.add_argument("--snapshot-every", dest="snapshot_every", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coopnet",
        description="Cooperation on growing, pruned networks (weak prisoner's dilemma).")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="single simulation")
    _single(p)
    _common(p)
    p = sub.add_parser("degrees", help="single simulation, then the degree histogram")
    _single(p)
    _common(p)
    p = sub.add_parser("sweep", help="variants x b grid x replicates")
    p.add_argument("--b-min", dest="b_min", type=float)
    p.add_argument("--b-max", dest="b_max", type=float)
    p.add_argument("--b-step", dest="b_step", type=float)
    p.add_argument("--replicates", type=int)
    p.add_argument("--variants", help="comma list such as epa_c,cra+_d, or 'all'")
    p.add_argument("--workers", type=int)
    _common(p)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        settings = resolve(args)
        return {"run": cmd_run, "sweep": cmd_sweep, "degrees": cmd_degrees}[args.command](settings)
    except (CoopnetError, ValueError) as exc:
        print(f"coopnet: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

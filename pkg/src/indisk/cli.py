"""Reproducible experiment runner and report emitter.

Subcommands: ``simulate`` (sweeps over r, per-replicate CSV plus a summary
report), ``verify-duality`` (vertex and defect oracles over fresh
replicates), ``coupling-demo`` (nested thinning of one marked process),
``constants`` (closed-form coefficients) and ``analyze`` (re-summarize an
existing records.csv).

Exit codes: 0 ok, 1 usage/config error, 2 verification failure, 3 runtime
anomaly threshold exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from datetime import datetime, timezone

import numpy as np

from .cell import CellRecord, UnboundedCellError, build_zero_cell, measure_cell
from .dual import defect_measure_mc, vertices_equal_extremes
from .geom import invert, polygon_minus_disk_area
from .sampler import (
    MODEL_IDS,
    StreamKey,
    coupled_triple,
    coupling_gap_means,
    generator_stream,
)
from .stats import (
    ExperimentDataset,
    anomaly_key,
    fit_exponent,
    normality_statistic,
    summarize,
    tail_estimates,
    theory_constants,
)

RECORDS_CSV_HEADER = (
    "model,r,replicate,seed,n_vertices,area_outside_scaled,area_outside_physical,"
    "circumradius_scaled,generators_consumed,a_event_flags"
)

# replicates whose cell build aborted are excluded and counted; a run whose
# exclusion rate passes this threshold exits with code 3
ANOMALY_RATE_LIMIT = 0.01

_KEY_DEFECT_MC = 1  # child namespace for the defect sampler (rings use 0)
_KEY_COUPLING = 2  # model-id slot used by coupling draws


@dataclass
class ExperimentConfig:
    """Flat, file-overridable experiment configuration.

    ``alphas`` parameterize the annulus-escape flags and must lie in
    [0, 2/3); for the Crofton model the flag reuses the same formula with
    intensity scale t = r as a diagnostic.
    """

    model: str = "voronoi"
    r_values: tuple = (10.0, 20.0, 50.0)
    replicates: int = 100
    master_seed: int = 1
    alphas: tuple = (0.4, 0.5, 0.6)
    etas: tuple = (0.25, 0.5, 1.0)
    mc_defect_samples: int = 10_000
    output_dir: str = "out"
    workers: int = 0  # 0 means machine parallelism
    timestamp: bool = True

    def validate(self) -> "ExperimentConfig":
        if self.model not in ("voronoi", "crofton", "both"):
            raise ValueError(f"model must be voronoi, crofton or both, not {self.model!r}")
        if not self.r_values:
            raise ValueError("r_values must be nonempty")
        if any(r <= 0 for r in self.r_values):
            raise ValueError("r values must be positive")
        if list(self.r_values) != sorted(self.r_values):
            raise ValueError("r values must be sorted ascending")
        if len(set(self.r_values)) != len(self.r_values):
            raise ValueError("r values must be distinct")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")
        if any(not (0.0 <= a < 2.0 / 3.0) for a in self.alphas):
            raise ValueError("alphas must lie in [0, 2/3)")
        if any(e <= 0 for e in self.etas):
            raise ValueError("etas must be positive")
        if self.mc_defect_samples < 1000:
            raise ValueError("mc_defect_samples must be at least 1000")
        if self.workers < 0:
            raise ValueError("workers must be nonnegative")
        return self

    def resolved_workers(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)

    def echo(self) -> dict:
        return {
            "model": self.model,
            "r_values": [float(r) for r in self.r_values],
            "replicates": self.replicates,
            "master_seed": self.master_seed,
            "alphas": [float(a) for a in self.alphas],
            "etas": [float(e) for e in self.etas],
            "mc_defect_samples": self.mc_defect_samples,
            "output_dir": self.output_dir,
            "workers": self.workers,
        }


# named sweeps so CI and the acceptance suite run one command each
PRESETS = {
    "acceptance-voronoi": dict(
        model="voronoi", r_values=(10.0, 20.0, 50.0, 100.0, 200.0), replicates=300
    ),
    "acceptance-voronoi-clt": dict(model="voronoi", r_values=(100.0,), replicates=2000),
    "acceptance-crofton": dict(
        model="crofton", r_values=(10.0, 30.0, 100.0, 300.0, 1000.0), replicates=300
    ),
    "acceptance-duality": dict(
        model="voronoi", r_values=(2.0, 5.0, 10.0, 20.0), replicates=250
    ),
    "acceptance-decay": dict(
        model="voronoi",
        r_values=(10.0, 31.622776601683793, 100.0),
        replicates=1000,
        alphas=(0.5,),
    ),
}

_LIST_FLOAT_KEYS = {"r_values", "alphas", "etas"}
_INT_KEYS = {"replicates", "master_seed", "mc_defect_samples", "workers"}
_STR_KEYS = {"model", "output_dir"}
_BOOL_KEYS = {"timestamp"}


def parse_config_file(path: str) -> dict:
    """Flat key = value file; '#' starts a comment; lists are comma-separated."""
    overrides = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            overrides[key] = _parse_config_value(key, value, where=f"{path}:{lineno}")
    return overrides


def _parse_config_value(key: str, value: str, where: str = "option"):
    try:
        if key in _LIST_FLOAT_KEYS:
            return tuple(float(v) for v in value.split(",") if v.strip())
        if key in _INT_KEYS:
            return int(value)
        if key in _STR_KEYS:
            return value
        if key in _BOOL_KEYS:
            if value.lower() in ("true", "1", "yes"):
                return True
            if value.lower() in ("false", "0", "no"):
                return False
            raise ValueError(value)
    except ValueError as exc:
        raise ValueError(f"{where}: bad value for {key}: {value!r}") from exc
    raise ValueError(f"{where}: unknown config key {key!r}")


def build_config(args) -> ExperimentConfig:
    """defaults < preset < config file < command line flags."""
    config = ExperimentConfig()
    preset = getattr(args, "preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ValueError(f"unknown preset {preset!r}; have {sorted(PRESETS)}")
        config = replace(config, **PRESETS[preset])
    if getattr(args, "config", None):
        config = replace(config, **parse_config_file(args.config))
    cli_map = {
        "model": getattr(args, "model", None),
        "replicates": getattr(args, "replicates", None),
        "master_seed": getattr(args, "seed", None),
        "output_dir": getattr(args, "out", None),
        "workers": getattr(args, "workers", None),
        "mc_defect_samples": getattr(args, "mc_defect_samples", None),
    }
    for key, value in cli_map.items():
        if value is not None:
            config = replace(config, **{key: value})
    for key in ("r", "alphas", "etas"):
        value = getattr(args, key, None)
        if value is not None:
            parsed = tuple(float(v) for v in value.split(",") if v.strip())
            field_name = "r_values" if key == "r" else key
            config = replace(config, **{field_name: parsed})
    if getattr(args, "no_timestamp", False):
        config = replace(config, timestamp=False)
    return config.validate()


def replicate_key(master_seed: int, model: str, r_idx: int, rep: int) -> StreamKey:
    return StreamKey((master_seed, MODEL_IDS[model], r_idx, rep))


def run_replicate(model: str, r: float, r_idx: int, rep: int, master_seed: int, alphas):
    """Build and measure one replicate; None when the safety cap aborted it."""
    key = replicate_key(master_seed, model, r_idx, rep)
    stream = generator_stream(model, r, key)
    try:
        result = build_zero_cell(stream)
    except UnboundedCellError:
        return None
    return measure_cell(
        result.polygon,
        model,
        r,
        alphas,
        generators_consumed=result.n_consumed,
        replicate=rep,
        seed=key.label(),
    )


def _worker(task):
    model, r_idx, r, rep, master_seed, alphas = task
    return task, run_replicate(model, r, r_idx, rep, master_seed, alphas)


def run_experiment(config: ExperimentConfig) -> ExperimentDataset:
    """Run the configured sweep; rows come back sorted by (model, r, replicate).

    Replicate RNG streams are keyed by (seed, model, r index, replicate), so
    the records are identical for any worker count or scheduling order.
    """
    models = ["crofton", "voronoi"] if config.model == "both" else [config.model]
    models.sort()
    tasks = [
        (model, r_idx, float(r), rep, config.master_seed, tuple(config.alphas))
        for model in models
        for r_idx, r in enumerate(config.r_values)
        for rep in range(config.replicates)
    ]
    workers = config.resolved_workers()
    if workers == 1:
        results = [_worker(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_worker, tasks, chunksize=chunk))
    records = []
    unbounded = {}
    for task, rec in results:
        model, _, r, _, _, _ = task
        if rec is None:
            key = anomaly_key(model, r)
            unbounded[key] = unbounded.get(key, 0) + 1
        else:
            records.append(rec)
    records.sort(key=lambda c: (c.model, c.r, c.replicate))
    return ExperimentDataset(
        records=records,
        config=config.echo(),
        anomalies={"unbounded": unbounded},
    )


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _flags_str(flags: dict) -> str:
    return ";".join(f"{a:g}:{1 if flags[a] else 0}" for a in sorted(flags))


def _flags_parse(text: str) -> dict:
    out = {}
    if text:
        for item in text.split(";"):
            a, v = item.split(":")
            out[float(a)] = bool(int(v))
    return out


def write_records_csv(records, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(RECORDS_CSV_HEADER + "\n")
        for c in records:
            row = (
                c.model,
                _fmt(c.r),
                str(c.replicate),
                c.seed,
                str(c.n_vertices),
                _fmt(c.area_outside_scaled),
                _fmt(c.area_outside_physical),
                _fmt(c.circumradius_scaled),
                str(c.generators_consumed),
                _flags_str(c.a_event_flags),
            )
            f.write(",".join(row) + "\n")


def read_records_csv(path: str):
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().rstrip("\n")
        if header != RECORDS_CSV_HEADER:
            raise ValueError(f"{path}: unrecognized records.csv header")
        records = []
        for lineno, line in enumerate(f, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 10:
                raise ValueError(f"{path}:{lineno}: expected 10 columns")
            records.append(
                CellRecord(
                    model=parts[0],
                    r=float(parts[1]),
                    replicate=int(parts[2]),
                    seed=parts[3],
                    n_vertices=int(parts[4]),
                    area_outside_scaled=float(parts[5]),
                    area_outside_physical=float(parts[6]),
                    circumradius_scaled=float(parts[7]),
                    generators_consumed=int(parts[8]),
                    a_event_flags=_flags_parse(parts[9]),
                )
            )
    return records


def build_summary(dataset: ExperimentDataset, etas, with_timestamp: bool) -> dict:
    """Structured report: per-r moments, exponent fits against the growth
    laws, normality and tail diagnostics, anomaly counters."""
    constants = theory_constants()
    results = {}
    for model in dataset.models():
        per_r = {}
        normality = {}
        tails = {}
        mean_n_pairs = []
        mean_v_pairs = []
        var_v_pairs = []
        for r in dataset.r_values(model):
            recs = dataset.records_for(model=model, r=r)
            if len(recs) < 2:
                continue
            summ = summarize(dataset, r, model=model)
            per_r[_fmt(r)] = summ
            mean_n_pairs.append((r, summ["mean_n_vertices"]))
            mean_v_pairs.append((r, summ["mean_area_outside"]))
            if summ["var_area_outside"] > 0:
                var_v_pairs.append((r, summ["var_area_outside"]))
            if len(recs) >= 100:
                v = [c.area_outside_physical for c in recs]
                normality[_fmt(r)] = normality_statistic(v)
            if len(recs) >= 1000:
                tails[_fmt(r)] = tail_estimates(dataset, r, etas, model=model)
        expo = constants.exponents[model]
        vertex_coeff = (
            constants.vertex_coeff_voronoi
            if model == "voronoi"
            else constants.vertex_coeff_crofton
        )
        area_coeff = (
            constants.area_coeff_voronoi if model == "voronoi" else constants.area_coeff_crofton
        )
        fits = {}
        if len(mean_n_pairs) >= 3:
            fits["mean_n_vertices"] = dict(
                fit_exponent(mean_n_pairs),
                theory_exponent=expo["n_vertices"],
                theory_coeff=vertex_coeff,
            )
            fits["mean_area_outside"] = dict(
                fit_exponent(mean_v_pairs),
                theory_exponent=expo["mean_area"],
                theory_coeff=area_coeff,
            )
            if len(var_v_pairs) >= 3:
                fits["var_area_outside"] = dict(
                    fit_exponent(var_v_pairs),
                    theory_exponent=expo["var_area"],
                    theory_coeff=None,
                )
        results[model] = {
            "per_r": per_r,
            "fits": fits,
            "normality": normality,
            "tails": tails,
        }
    unbounded = dataset.anomalies.get("unbounded", {})
    summary = {
        "format": "indisk-summary-1",
        "config": dataset.config,
        "constants": {
            "vertex_coeff_voronoi": constants.vertex_coeff_voronoi,
            "vertex_coeff_crofton": constants.vertex_coeff_crofton,
            "area_base": constants.area_base,
            "area_coeff_voronoi": constants.area_coeff_voronoi,
            "area_coeff_crofton": constants.area_coeff_crofton,
        },
        "anomalies": {
            "unbounded": dict(sorted(unbounded.items())),
            "unbounded_total": int(sum(unbounded.values())),
            "records_total": len(dataset.records),
        },
        "results": results,
    }
    if with_timestamp:
        summary["timestamp"] = datetime.now(timezone.utc).isoformat()
    return summary


def write_summary(summary: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")


def cmd_simulate(args) -> int:
    config = build_config(args)
    dataset = run_experiment(config)
    os.makedirs(config.output_dir, exist_ok=True)
    records_path = os.path.join(config.output_dir, "records.csv")
    summary_path = os.path.join(config.output_dir, "summary.json")
    write_records_csv(dataset.records, records_path)
    summary = build_summary(dataset, config.etas, with_timestamp=config.timestamp)
    write_summary(summary, summary_path)
    total = len(dataset.records) + summary["anomalies"]["unbounded_total"]
    print(f"wrote {records_path} ({len(dataset.records)} records) and {summary_path}")
    for model in dataset.models():
        for r in dataset.r_values(model):
            summ = summary["results"][model]["per_r"].get(_fmt(r))
            if summ:
                print(
                    f"  {model} r={r:g}: n={summ['n_replicates']} "
                    f"mean_N={summ['mean_n_vertices']:.3f} "
                    f"mean_V={summ['mean_area_outside']:.5g}"
                )
    if total and summary["anomalies"]["unbounded_total"] / total > ANOMALY_RATE_LIMIT:
        print(
            f"anomaly threshold exceeded: {summary['anomalies']['unbounded_total']}/{total} "
            "replicates aborted unbounded",
            file=sys.stderr,
        )
        return 3
    return 0


def run_duality_suite(config: ExperimentConfig, defect_per_r: int = 100) -> dict:
    """Vertex-duality oracle on every replicate; defect oracle on a prefix."""
    total = 0
    matched = 0
    degenerate = 0
    mismatches = []
    defect_total = 0
    defect_ok = 0
    max_dev = 0.0
    for r_idx, r in enumerate(config.r_values):
        for rep in range(config.replicates):
            key = replicate_key(config.master_seed, "voronoi", r_idx, rep)
            result = build_zero_cell(generator_stream("voronoi", float(r), key))
            check = vertices_equal_extremes(result.generators)
            total += 1
            if check.degenerate:
                degenerate += 1
            elif check.matched:
                matched += 1
            else:
                mismatches.append(
                    {"r": float(r), "replicate": rep, "n_cell": check.n_cell, "n_hull": check.n_hull}
                )
            if rep < defect_per_r:
                germs = invert(result.generators[1:])
                rho_min = 1.0 / result.polygon.circumradius()
                exact = polygon_minus_disk_area(result.polygon, 1.0)
                n_mc = max(config.mc_defect_samples, 100 * len(germs))
                estimate, se = defect_measure_mc(
                    germs, rho_min, n_mc, key.child(_KEY_DEFECT_MC).generator()
                )
                defect_total += 1
                dev = abs(estimate - exact) / se if se > 0 else (
                    0.0 if abs(estimate - exact) < 1e-9 else math.inf
                )
                max_dev = max(max_dev, dev)
                if dev <= 4.0:
                    defect_ok += 1
    checked = total - degenerate
    skip_rate = degenerate / total if total else 0.0
    defect_rate = defect_ok / defect_total if defect_total else 1.0
    report = {
        "vertex_duality": {
            "total": total,
            "checked": checked,
            "matched": matched,
            "mismatches": mismatches,
            "degenerate_skipped": degenerate,
            "skip_rate": skip_rate,
        },
        "defect_duality": {
            "total": defect_total,
            "within_4se": defect_ok,
            "rate": defect_rate,
            "max_dev_se": max_dev,
        },
        "pass": (not mismatches) and skip_rate < 1e-3 and defect_rate >= 0.99,
    }
    return report


def cmd_verify_duality(args) -> int:
    config = build_config(args)
    no_grid_given = (
        getattr(args, "preset", None) is None
        and getattr(args, "config", None) is None
        and getattr(args, "r", None) is None
    )
    if no_grid_given:
        config = replace(
            config,
            r_values=(2.0, 5.0, 10.0, 20.0),
            replicates=args.replicates if args.replicates else 250,
        ).validate()
    report = run_duality_suite(config)
    print(json.dumps(report, indent=2, sort_keys=True))
    if getattr(args, "out", None):
        os.makedirs(args.out, exist_ok=True)
        write_summary(report, os.path.join(args.out, "duality_report.json"))
    return 0 if report["pass"] else 2


def cmd_coupling_demo(args) -> int:
    t = args.t
    eps = args.eps
    n = args.n
    if t <= 0 or not (0.0 < eps < 1.0) or n < 1:
        raise ValueError("need t > 0, eps in (0, 1) and n >= 1")
    gaps_xy = np.empty(n)
    gaps_yup = np.empty(n)
    violations = 0
    for i in range(n):
        trip = coupled_triple(t, eps, StreamKey((args.seed, _KEY_COUPLING, i)))
        mx, my, mup = trip.mask_x, trip.mask_y, trip.mask_x_up
        if np.any(mx & ~my) or np.any(my & ~mup):
            violations += 1
        gaps_xy[i] = int(my.sum()) - int(mx.sum())
        gaps_yup[i] = int(mup.sum()) - int(my.sum())
    exp_xy, exp_yup = coupling_gap_means(t, eps)
    report = {
        "t": t,
        "eps": eps,
        "draws": n,
        "inclusion_violations": violations,
        "gap_y_minus_x": {
            "mean": float(gaps_xy.mean()),
            "se": float(gaps_xy.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
            "expected": exp_xy,
        },
        "gap_xup_minus_y": {
            "mean": float(gaps_yup.mean()),
            "se": float(gaps_yup.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
            "expected": exp_yup,
        },
    }
    print(json.dumps(report, indent=2, sort_keys=True))
    return 2 if violations else 0


def cmd_constants(args) -> int:
    c = theory_constants()
    rows = [
        ("vertex_coeff_voronoi", c.vertex_coeff_voronoi, "4*pi*3^(-1/3)*Gamma(5/3)"),
        ("vertex_coeff_crofton", c.vertex_coeff_crofton, "2^(4/3)*pi*3^(-1/3)*Gamma(5/3)"),
        ("area_base", c.area_base, "Gamma(2/3)*(pi/2)^(2/3)*3^(-1/3)"),
        ("area_coeff_voronoi", c.area_coeff_voronoi, "2*pi*(4*pi)^(-2/3)*area_base"),
        ("area_coeff_crofton", c.area_coeff_crofton, "2*pi*pi^(-2/3)*area_base"),
    ]
    for name, value, formula in rows:
        print(f"{name:22s} = {value:.17g}  (~{value:.5f})  [{formula}]")
    print("growth exponents:")
    for model, expos in sorted(c.exponents.items()):
        for key, e in sorted(expos.items()):
            print(f"  {model:8s} {key:12s} r^({e:.17g})")
    return 0


def cmd_analyze(args) -> int:
    records = read_records_csv(args.records)
    if not records:
        raise ValueError(f"{args.records}: no records")
    etas = (
        tuple(float(v) for v in args.etas.split(",") if v.strip())
        if getattr(args, "etas", None)
        else ExperimentConfig().etas
    )
    dataset = ExperimentDataset(
        records=records,
        config={"source": args.records, "etas": list(etas)},
        anomalies={},
    )
    summary = build_summary(dataset, etas, with_timestamp=not args.no_timestamp)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "summary.json")
    write_summary(summary, path)
    print(f"wrote {path}")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _add_common(sub):
    sub.add_argument("--config", help="flat key = value config file")
    sub.add_argument("--preset", help=f"named sweep: {', '.join(sorted(PRESETS))}")
    sub.add_argument("--seed", type=int, help="master seed")
    sub.add_argument("--replicates", type=int)
    sub.add_argument("--r", help="comma-separated inradius values")
    sub.add_argument("--model", choices=["voronoi", "crofton", "both"])
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--workers", type=int, help="worker processes (0 = machine parallelism)")
    sub.add_argument("--alphas", help="comma-separated escape-event alphas in [0, 2/3)")
    sub.add_argument("--etas", help="comma-separated tail-table etas > 0")
    sub.add_argument("--mc-defect-samples", dest="mc_defect_samples", type=int)
    sub.add_argument("--no-timestamp", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="indisk", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="run a sweep and write records + summary")
    _add_common(sim)
    sim.set_defaults(func=cmd_simulate)

    ver = subs.add_parser("verify-duality", help="run the duality oracles")
    _add_common(ver)
    ver.set_defaults(func=cmd_verify_duality)

    cpl = subs.add_parser("coupling-demo", help="nested thinning demonstration")
    cpl.add_argument("--t", type=float, default=1000.0)
    cpl.add_argument("--eps", type=float, default=0.1)
    cpl.add_argument("--n", type=int, default=1000)
    cpl.add_argument("--seed", type=int, default=1)
    cpl.set_defaults(func=cmd_coupling_demo)

    con = subs.add_parser("constants", help="print the closed-form constants")
    con.set_defaults(func=cmd_constants)

    ana = subs.add_parser("analyze", help="re-summarize an existing records.csv")
    ana.add_argument("--records", required=True)
    ana.add_argument("--out")
    ana.add_argument("--etas")
    ana.add_argument("--no-timestamp", action="store_true")
    ana.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: runs the laboratory experiments and writes CSV/JSON tables.

Commands: norm-stats (exact partition function vs Monte-Carlo second moment),
var-scan (gradient-variance scans), polyomino (enumeration vs series plus the
toric decomposition check), bounds (closed-form bound reports). Every output
embeds the run configuration; a fixed seed makes outputs reproducible
byte-for-byte apart from the elapsed-time metadata field in JSON files.

Exit codes: 0 success, 2 invalid configuration, 3 acceptance-check failure,
4 resource cap exceeded.
"""

import argparse
import csv
import json
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from .errors import ResourceLimitError
from .lattice import LatticeSpec
from .losses import (GLOBAL_NORMALIZED, LOCAL_NORMALIZED, LossSpec,
                     plus_projector, plus_target)
from .polyomino import (enumerate_directed, series_coefficients, stats,
                        Polyomino, verify_decomposition)
from .spinmodel import exact_partition_function, mc_second_moment, norm_weights
from .variance import distance_profile, variance_scan

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CHECK = 3
EXIT_RESOURCE = 4

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RunConfig:
    command: str
    sizes: tuple
    bond_dim: int
    phys_dim: int
    samples: int
    seed: int
    out: str
    format: str
    workers: int

    def to_json_dict(self):
        d = asdict(self)
        d["sizes"] = [list(s) for s in self.sizes]
        return d


def _parse_sizes(text):
    sizes = []
    for part in text.split(","):
        try:
            a, b = part.lower().split("x")
            sizes.append((int(a), int(b)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad size {part!r}; expected e.g. 2x3")
    return tuple(sizes)


def _write_csv(path, rows, config):
    with open(path, "w", newline="") as fh:
        fh.write("# config: " + json.dumps(config.to_json_dict(), sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerows(rows)


def _write_json(path, payload, config, elapsed):
    doc = {"schema_version": SCHEMA_VERSION, "config": config.to_json_dict(),
           "elapsed_seconds": elapsed, **payload}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _emit(outdir, name, config, elapsed, rows=None, payload=None):
    outdir.mkdir(parents=True, exist_ok=True)
    if config.format in ("csv", "both") and rows is not None:
        _write_csv(outdir / f"{name}.csv", rows, config)
    if config.format in ("json", "both") and payload is not None:
        _write_json(outdir / f"{name}.json", payload, config, elapsed)


def cmd_norm_stats(config):
    t0 = time.monotonic()
    rng = np.random.default_rng(config.seed)
    rows = [("l1", "l2", "D", "d", "n_samples", "z_exact", "mc_mean", "mc_se",
             "deviation_over_se", "ok")]
    records = []
    failed = False
    table = norm_weights(config.bond_dim, config.phys_dim)
    for l1, l2 in config.sizes:
        spec = LatticeSpec(l1, l2, config.bond_dim, config.phys_dim)
        z = exact_partition_function(l1, l2, table).z
        mean, se = mc_second_moment(spec, config.samples, rng)
        dev = abs(mean - z) / se
        ok = dev <= 3.0
        failed = failed or not ok
        rows.append((l1, l2, config.bond_dim, config.phys_dim, config.samples,
                     repr(z), repr(mean), repr(se), repr(dev), ok))
        records.append({"l1": l1, "l2": l2, "z_exact": z, "mc_mean": mean,
                        "mc_se": se, "deviation_over_se": dev, "ok": ok})
    _emit(Path(config.out), "norm_stats", config, time.monotonic() - t0,
          rows=rows, payload={"records": records})
    return EXIT_CHECK if failed else EXIT_OK


def cmd_var_scan(config, loss_kind):
    t0 = time.monotonic()
    outdir = Path(config.out)
    summary_rows = [("l1", "l2", "n_sites", "loss", "summary_stat", "value")]
    records = []
    for i, (l1, l2) in enumerate(config.sizes):
        spec = LatticeSpec(l1, l2, config.bond_dim, config.phys_dim)
        if loss_kind == GLOBAL_NORMALIZED:
            loss = LossSpec(kind=loss_kind, target=plus_target(spec))
            stat_name = "mean"
        else:
            loss = LossSpec(kind=loss_kind, observable=plus_projector(spec.d), site=(0, 0))
            stat_name = "max"
        report = variance_scan(spec, loss, config.samples, config.seed + i,
                               workers=config.workers)
        value = float(np.mean(report.variance) if stat_name == "mean"
                      else np.max(report.variance))
        summary_rows.append((l1, l2, spec.n_sites, loss_kind, stat_name, repr(value)))
        rec = report.to_json_dict()
        rec["summary"] = {stat_name: value}
        if loss_kind == LOCAL_NORMALIZED:
            prof = distance_profile(report)
            rec["distance_profile"] = {str(k): list(v) for k, v in prof.items()}
        records.append(rec)
        _emit(outdir, f"var_scan_sites_{l1}x{l2}", config, report.elapsed_seconds,
              rows=report.csv_rows())
    _emit(outdir, "var_scan_summary", config, time.monotonic() - t0,
          rows=summary_rows, payload={"records": records})
    return EXIT_OK


def cmd_polyomino(config, max_area):
    t0 = time.monotonic()
    enum = enumerate_directed(max_area)
    series = series_coefficients(max_area, max_area)
    rows = [("area", "upper_perimeter", "enumerated", "series", "match")]
    mismatch = False
    for key in sorted(set(enum.counts) | set(series.counts)):
        a, b = enum.counts.get(key, 0), series.counts.get(key, 0)
        mismatch = mismatch or a != b
        rows.append((key[0], key[1], a, b, a == b))

    bridge_rows = [("L", "n_valid_configs", "n_violations")]
    bridge_ok = True
    bridge_records = []
    for l1, l2 in config.sizes:
        if l1 != l2:
            raise ValueError("the toric decomposition check needs square sizes")
        rep = verify_decomposition(l1)
        bridge_ok = bridge_ok and rep.ok
        bridge_rows.append((l1, rep.n_valid, rep.n_violations))
        bridge_records.append({"L": l1, "n_valid": rep.n_valid,
                               "n_violations": rep.n_violations})

    # reference shape: directed polyomino with the documented statistics (6, 14, 3)
    ref = Polyomino(frozenset({(-3, -1), (-2, -1), (-1, -2), (-1, -1), (-1, 0), (0, 0)}))
    ref_stats = stats(ref)
    ref_rows = [("area", "perimeter", "upper_perimeter", "cells"),
                (ref_stats.area, ref_stats.perimeter, ref_stats.upper_perimeter,
                 json.dumps(sorted(ref.cells)))]

    elapsed = time.monotonic() - t0
    outdir = Path(config.out)
    _emit(outdir, "polyomino_reference", config, elapsed, rows=ref_rows)
    _emit(outdir, "polyomino_counts", config, elapsed, rows=rows, payload={
        "counts": [{"area": k[0], "upper_perimeter": k[1], "count": v}
                   for k, v in sorted(enum.counts.items())],
        "series_matches_enumeration": not mismatch,
        "reference_shape": {"cells": sorted(ref.cells), "area": ref_stats.area,
                            "perimeter": ref_stats.perimeter,
                            "upper_perimeter": ref_stats.upper_perimeter},
        "decomposition": bridge_records,
    })
    _emit(outdir, "polyomino_decomposition", config, elapsed, rows=bridge_rows)
    return EXIT_OK if (not mismatch and bridge_ok) else EXIT_CHECK


def cmd_bounds(config):
    t0 = time.monotonic()
    D, d = config.bond_dim, config.phys_dim
    reports = []
    table = norm_weights(D, d)
    for l1, l2 in config.sizes:
        if l1 != l2:
            raise ValueError("norm bound reports use square sizes")
        z = exact_partition_function(l1, l1, table).z
        reports.append(bounds_mod.norm_excess_report(l1, D, d, z))
    for dd in (2, 3, 4):
        for dp in (2, 3, 4):
            ratio = bounds_mod.global_variance_ratio(dd, dp)
            reports.append(bounds_mod.BoundReport(
                "global_variance_ratio", {"D": dd, "d": dp}, 1.0, ratio,
                ratio < 1.0, 1.0 / ratio))
    pre_generic, pre_obs = bounds_mod.onsite_floor_prefactors(D, d, tr_o2=2.0)
    reports.append(bounds_mod.BoundReport(
        "onsite_floor_prefactor", {"D": D, "d": d, "tr_o2": 2.0},
        pre_obs, pre_generic, pre_generic <= pre_obs, pre_obs / pre_generic))

    rows = [("name", "params", "bound", "compared", "satisfied", "slack")]
    ok = True
    for r in reports:
        ok = ok and r.satisfied
        rows.append((r.name, json.dumps(r.params, sort_keys=True), repr(r.bound),
                     repr(r.compared), r.satisfied, repr(r.slack)))
    _emit(Path(config.out), "bounds", config, time.monotonic() - t0, rows=rows,
          payload={"reports": [r.to_json_dict() for r in reports]})
    return EXIT_OK if ok else EXIT_CHECK


def build_parser():
    parser = argparse.ArgumentParser(prog="tnlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("norm-stats", "var-scan", "polyomino", "bounds"):
        p = sub.add_parser(name)
        p.add_argument("--sizes", type=_parse_sizes, default=((2, 2), (2, 3), (3, 3)),
                       help="comma-separated lattice sizes, e.g. 2x2,3x3")
        p.add_argument("--bond-dim", type=int, default=2)
        p.add_argument("--phys-dim", type=int, default=2)
        p.add_argument("--samples", type=int, default=1000)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--out", default="tnlab-out")
        p.add_argument("--format", choices=("csv", "json", "both"), default="both")
        p.add_argument("--workers", type=int, default=1)
        if name == "var-scan":
            p.add_argument("--loss", choices=(GLOBAL_NORMALIZED, LOCAL_NORMALIZED),
                           default=GLOBAL_NORMALIZED)
        if name == "polyomino":
            p.add_argument("--max-area", type=int, default=10)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    config = RunConfig(command=args.command, sizes=args.sizes, bond_dim=args.bond_dim,
                       phys_dim=args.phys_dim, samples=args.samples, seed=args.seed,
                       out=args.out, format=args.format, workers=args.workers)
    try:
        if args.command == "norm-stats":
            return cmd_norm_stats(config)
        if args.command == "var-scan":
            return cmd_var_scan(config, args.loss)
        if args.command == "polyomino":
            return cmd_polyomino(config, args.max_area)
        if args.command == "bounds":
            return cmd_bounds(config)
        raise AssertionError(f"unhandled command {args.command}")
    except ResourceLimitError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

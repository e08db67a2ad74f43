"""Command-line simulator.

    lanempc run --scenario scenarios/static_three_vehicle.json \
                --controller both --out results/

Loads a scenario document (JSON; schema in the README), runs the requested
controller(s), and writes CSV logs plus a metrics summary.  Exit codes:
0 collision-free completion, 1 usage/config error, 2 collision,
3 solver/plant abort.
"""

import argparse
import dataclasses
import json
import os
import sys

from . import dubins, harness
from .dynamics import VehicleParams
from .mpc import MpcConfig
from .scenario import ScenarioSchemaError, scenario_from_dict

TRAJECTORY_COLUMNS = ("t", "vx", "vy", "r", "X", "Y", "psi", "delta_f",
                      "Tr", "J", "Xd", "Yd", "clearance", "converged")

METRIC_COLUMNS = ("rms_lateral_error", "max_lateral_error", "min_clearance",
                  "yaw_smoothness", "control_saturation_fraction")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser():
    parser = _Parser(prog="lanempc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="simulate a scenario", )
    run.add_argument("--scenario", required=True,
                     help="path to a scenario JSON document")
    run.add_argument("--controller", default="integrated",
                     choices=("integrated", "two_level", "both"))
    run.add_argument("--out", default=".",
                     help="output directory for CSV files (default: cwd)")
    run.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE",
                     help="override a controller/vehicle field by name "
                          "(repeatable), e.g. --set Np=5 --set mu=0.6")
    run.add_argument("--dump-path", action="store_true",
                     help="write reference_path.csv and waypoints.csv only "
                          "(no simulation)")
    return parser


def _fmt(value):
    """Full-precision CSV cell: shortest decimal that parses back exactly."""
    if isinstance(value, bool):
        return "1" if value else "0"
    return repr(float(value))


def override_targets():
    """Overridable field names -> (dataclass name, field type)."""
    table = {}
    for cls, label in ((MpcConfig, "mpc"), (VehicleParams, "vehicle")):
        for f in dataclasses.fields(cls):
            if f.type in ("int", "float", int, float):
                table[f.name] = (label, int if f.type in ("int", int) else float)
    return table


def _apply_overrides(pairs, cfg, params):
    table = override_targets()
    cfg_updates = {}
    par_updates = {}
    for raw in pairs:
        if "=" not in raw:
            raise _UsageError(f"--set expects KEY=VALUE, got {raw!r}")
        key, _, text = raw.partition("=")
        key = key.strip()
        if key not in table:
            raise _UsageError(f"unknown --set key {key!r}")
        label, typ = table[key]
        try:
            value = typ(text)
        except ValueError:
            raise _UsageError(
                f"--set {key}: cannot parse {text!r} as {typ.__name__}")
        (cfg_updates if label == "mpc" else par_updates)[key] = value
    try:
        if cfg_updates:
            cfg = dataclasses.replace(cfg, **cfg_updates)
        if par_updates:
            params = dataclasses.replace(params, **par_updates)
    except ValueError as exc:
        raise _UsageError(str(exc))
    return cfg, params


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def write_trajectory_csv(path, log):
    rows = []
    for r in log.rows:
        s = r.state
        rows.append(tuple(_fmt(v) for v in (
            r.t, s.vx, s.vy, s.r, s.X, s.Y, s.psi, r.control[0],
            r.control[1], r.cost, r.ref_x, r.ref_y, r.clearance)) +
            (_fmt(bool(r.converged)),))
    _write_csv(path, TRAJECTORY_COLUMNS, rows)


def read_trajectory_csv(path):
    """Inverse of write_trajectory_csv; returns a list of dicts."""
    with open(path, newline="") as fh:
        header = fh.readline().strip().split(",")
        out = []
        for line in fh:
            cells = line.strip().split(",")
            row = {k: float(v) for k, v in zip(header, cells)}
            row["converged"] = bool(int(cells[header.index("converged")]))
            out.append(row)
    return out


def write_metrics_csv(path, metrics):
    values = tuple(_fmt(getattr(metrics, name)) for name in METRIC_COLUMNS)
    _write_csv(path, METRIC_COLUMNS, [values])


def write_path_csvs(out_dir, path):
    rows = [tuple(_fmt(v) for v in row) for row in dubins.dense_samples(path)]
    _write_csv(os.path.join(out_dir, "reference_path.csv"),
               ("s", "x", "y", "heading", "curvature"), rows)
    wrows = [(label, _fmt(x), _fmt(y))
             for label, (x, y) in zip(path.waypoint_labels(), path.waypoints)]
    _write_csv(os.path.join(out_dir, "waypoints.csv"),
               ("label", "x", "y"), wrows)


def _summary_line(name, metrics):
    return (f"{name}: rms_err={metrics.rms_lateral_error:.4f} m  "
            f"max_err={metrics.max_lateral_error:.4f} m  "
            f"min_clearance={metrics.min_clearance:.4f} m  "
            f"yaw_smoothness={metrics.yaw_smoothness:.6f}  "
            f"saturation={metrics.control_saturation_fraction:.3f}")


def main(argv=None):
    """Run the CLI; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1

    try:
        with open(args.scenario) as fh:
            doc = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read scenario file {args.scenario!r}: {exc}",
              file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: scenario file {args.scenario!r} is not valid JSON: "
              f"{exc}", file=sys.stderr)
        return 1

    try:
        scenario = scenario_from_dict(doc)
    except (ScenarioSchemaError, ValueError) as exc:
        print(f"error: scenario file {args.scenario!r}: {exc}",
              file=sys.stderr)
        return 1

    cfg = MpcConfig()
    params = VehicleParams()
    try:
        cfg, params = _apply_overrides(args.overrides, cfg, params)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    os.makedirs(args.out, exist_ok=True)
    try:
        path = dubins.build_lane_change_path(scenario,
                                             scenario.ego_initial.vx, params)
    except dubins.PathConstructionError as exc:
        print(f"error: cannot plan a path for this scenario: {exc}",
              file=sys.stderr)
        return 3
    write_path_csvs(args.out, path)
    if args.dump_path:
        print(f"wrote reference_path.csv and waypoints.csv to {args.out}")
        return 0

    controllers = (("integrated", "two_level") if args.controller == "both"
                   else (args.controller,))
    collided = False
    for name in controllers:
        try:
            log = harness.run(scenario, params, cfg, controller=name)
        except harness.SimulationAborted as exc:
            if exc.log.rows:
                write_trajectory_csv(
                    os.path.join(args.out, f"trajectory_{name}.csv"), exc.log)
            print(f"error: {name} run aborted: {exc.cause}", file=sys.stderr)
            return 3
        write_trajectory_csv(
            os.path.join(args.out, f"trajectory_{name}.csv"), log)
        metrics = harness.compute_metrics(log, path, scenario, cfg)
        write_metrics_csv(
            os.path.join(args.out, f"metrics_{name}.csv"), metrics)
        print(_summary_line(name, metrics))
        if metrics.min_clearance <= 0.0:
            collided = True
    return 2 if collided else 0


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()

"""Batch front door: validate a config, run the protocol, persist results.

Subcommands: ``run`` (one config, one output set), ``sweep`` (re-run a
config over values of one numeric parameter), ``invert`` (spin-pair
geometry from persisted scan CSVs), ``bath-gen`` (persist a bath
realization).  Exit codes: 0 success (warnings land in the outputs),
2 schema violation, 3 compute failure; failures emit a JSON error record
on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import configio
from .bath import BathConfig, decoupling_signal, sample_bath
from .configio import SchemaError
from .constants import GYROMAGNETIC_KHZ_PER_G
from .inversion import (
    DegenerateAxisError,
    find_dips,
    scan_deltas,
    invert_pair_geometry,
    distance_from_g,
)
from .models import (
    FieldConfig,
    H3PO4Geometry,
    NC60Geometry,
    PairProbeGeometry,
    direction_from_angles,
    direction_from_hyperfine,
)
from .dynamics import SignalTrace
from .protocols import (
    PairConfig,
    PositionConfig,
    QndConfig,
    RadicalConfig,
    SpinLabelConfig,
    direction_scan,
    estimate_position,
    label_resonances,
    orthogonal_field_trace,
    pair_resonance_experiment,
    qnd_repeat,
    qnd_scan,
    radical_monitor,
    radical_scan,
)


def _fail(code: int, record: dict) -> int:
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return code


def _position_config(p: dict) -> PositionConfig:
    geometry = H3PO4Geometry(
        p_direction=tuple(
            direction_from_hyperfine(
                np.deg2rad(p["hyperfine_theta_deg"]),
                np.deg2rad(p["hyperfine_phi_deg"]),
            )
        ),
        p_distance_nm=p["p_distance_nm"],
        ph_distance_nm=p["ph_distance_nm"],
    )
    return PositionConfig(
        b_gauss=p["b_gauss"],
        rf_rabi_khz=p["rf_rabi_khz"],
        readout_ms=p["readout_ms"],
        include_back_action=p["include_back_action"],
        geometry=geometry,
    )


def _run_position_scan(resolved: dict, out: Path, jobs: int) -> dict:
    p = resolved["params"]
    cfg = _position_config(p)
    dmap = direction_scan(
        cfg, n_theta=p["n_theta"], n_phi=p["n_phi"], rf_on=p["rf_on"], jobs=jobs
    )
    configio.write_map_csv(out / "map.csv", dmap, resolved)
    return {"outputs": ["map.csv"]}


def _run_position_estimate(resolved: dict, out: Path, jobs: int) -> dict:
    p = resolved["params"]
    cfg = _position_config(p)
    dmap = direction_scan(cfg, n_theta=p["n_theta"], n_phi=p["n_phi"], jobs=jobs)
    times = np.linspace(0.0, p["readout_ms"], p["trace_points"])
    trace = orthogonal_field_trace(cfg, times_ms=times)
    est = estimate_position(dmap, trace, cfg)
    configio.write_map_csv(out / "map.csv", dmap, resolved)
    configio.write_trace_csv(out / "trace.csv", trace, resolved)
    payload = {
        "theta_deg": float(np.rad2deg(est.theta)),
        "phi_deg": float(np.rad2deg(est.phi)),
        "theta_alternate_deg": float(np.rad2deg(est.theta_alternate)),
        "phi_alternate_deg": float(np.rad2deg(est.phi_alternate)),
        "j_khz": est.j_khz,
        "g_khz": est.g_khz,
        "distance_nm": est.distance_nm,
        "g_khz_alternate": est.g_khz_alternate,
        "distance_nm_alternate": est.distance_nm_alternate,
        "fit_rms": est.fit_rms,
        "low_confidence": est.low_confidence,
        "config_hash": configio.config_hash(resolved),
    }
    configio.write_json(out / "estimate.json", payload)
    return {"outputs": ["map.csv", "trace.csv", "estimate.json"],
            "low_confidence": est.low_confidence}


def _run_qnd(resolved: dict, out: Path, jobs: int) -> dict:
    p = resolved["params"]
    cfg = QndConfig(
        omega_e_mhz=p["omega_e_mhz"],
        readout_us=p["readout_us"],
        geometry=NC60Geometry(distance_nm=p["distance_nm"]),
    )
    grid = np.arange(
        p["grid_min_mhz"], p["grid_max_mhz"] + p["grid_step_mhz"] / 2,
        p["grid_step_mhz"],
    )
    outputs = []
    for m_i in (0, 1):
        scan = qnd_scan(m_i, grid, cfg, jobs=jobs)
        name = f"scan_mi{m_i}.csv"
        configio.write_scan_csv(out / name, scan, resolved)
        outputs.append(name)
        if m_i == 1:
            dips = find_dips(scan, depth_threshold=0.05)
            dmeta = {"source": name}
            if len(dips) == 3:
                dmeta["satellite_splitting"] = 0.5 * (
                    dips[2].center - dips[0].center
                )
            configio.write_dips_csv(
                out / "dips_mi1.csv", dips, "MHz", resolved, dmeta
            )
            outputs.append("dips_mi1.csv")
        signal, fidelity = qnd_repeat(
            p["n_readouts"], p["readout_us"], m_i, cfg
        )
        for label, tr in (("signal", signal), ("fidelity", fidelity)):
            name = f"repeat_{label}_mi{m_i}.csv"
            configio.write_trace_csv(out / name, tr, resolved)
            outputs.append(name)
    return {"outputs": outputs}


def _run_pair(resolved: dict, out: Path, jobs: int) -> dict:
    p = resolved["params"]
    geometry = PairProbeGeometry(
        separation_nm=p["separation_nm"],
        pair_direction=tuple(direction_from_angles(
            np.deg2rad(p["pair_theta_deg"]), np.deg2rad(p["pair_phi_deg"]))),
        center_distance_nm=p["center_distance_nm"],
        center_direction=tuple(direction_from_angles(
            np.deg2rad(p["center_theta_deg"]), np.deg2rad(p["center_phi_deg"]))),
        species=p["species"],
    )
    cfg = PairConfig(
        target_larmor_khz=p["target_larmor_khz"],
        geometry=geometry,
        readout_ms=p["readout_ms"],
        readout_min_ms=p["readout_min_ms"],
        readout_samples=p["readout_samples"],
    )
    grid = np.arange(
        p["target_larmor_khz"] - p["grid_span_khz"],
        p["target_larmor_khz"] + p["grid_span_khz"] + p["grid_step_khz"] / 2,
        p["grid_step_khz"],
    )
    outputs = []
    warnings = []
    args = [(cfg, name, grid) for name in p["directions"]]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            scans = list(pool.map(_pair_worker, args))
    else:
        scans = [_pair_worker(a) for a in args]
    for name, scan in zip(p["directions"], scans):
        safe = name.replace("+", "p").replace("-", "m")
        fname = f"scan_{safe}.csv"
        configio.write_scan_csv(out / fname, scan, resolved)
        outputs.append(fname)
        dips = find_dips(scan, depth_threshold=0.02)
        dname = f"dips_{safe}.csv"
        dmeta = {"direction": name, "source": fname}
        splitting = _main_splitting(dips)
        if splitting is not None:
            dmeta["main_splitting"] = splitting
        configio.write_dips_csv(out / dname, dips, "kHz", resolved, dmeta)
        outputs.append(dname)
        if len(dips) < 2:
            warnings.append(f"direction {name}: fewer than two dips resolved")
    return {"outputs": outputs, "warnings": warnings}


def _pair_worker(args):
    cfg, name, grid = args
    return pair_resonance_experiment(cfg, direction=name, omega_grid_khz=grid)


def _main_splitting(dips) -> float | None:
    """Separation of the two deepest dips, for figure annotation."""
    if len(dips) < 2:
        return None
    two = sorted(sorted(dips, key=lambda d: -d.depth)[:2], key=lambda d: d.center)
    return float(two[1].center - two[0].center)


def _run_labels(resolved: dict, out: Path, jobs: int) -> dict:
    p = resolved["params"]
    center = p["center_distance_nm"] if p["center_distance_nm"] > 0 else None
    cfg = SpinLabelConfig(
        label_rabi_khz=p["label_rabi_khz"],
        separation_nm=p["separation_nm"],
        cos_theta=p["cos_theta"],
        center_distance_nm=center,
        readout_us=p["readout_us"],
        readout_samples=p["readout_samples"],
    )
    if p["equal_couplings"]:
        a1, a2 = cfg.couplings()
        mean = 0.5 * (a1 + a2)
        cfg = SpinLabelConfig(
            label_rabi_khz=p["label_rabi_khz"],
            separation_nm=p["separation_nm"],
            cos_theta=p["cos_theta"],
            a1_khz=mean, a2_khz=mean,
            readout_us=p["readout_us"],
            readout_samples=p["readout_samples"],
        )
    span = 1.3 * 0.75 * cfg.coupling_khz * max(abs(1 - 3 * p["cos_theta"] ** 2), 1.0)
    grid = np.arange(
        p["label_rabi_khz"] - span, p["label_rabi_khz"] + span, p["grid_step_khz"]
    )
    scan = label_resonances(cfg, omega_grid_khz=grid)
    configio.write_scan_csv(out / "scan.csv", scan, resolved)
    dips = find_dips(scan, depth_threshold=0.02)
    dmeta = {"source": "scan.csv"}
    splitting = _main_splitting(dips)
    if splitting is not None:
        dmeta["main_splitting"] = splitting
    configio.write_dips_csv(out / "dips.csv", dips, "kHz", resolved, dmeta)
    return {"outputs": ["scan.csv", "dips.csv"]}


def _run_radical(resolved: dict, out: Path, jobs: int) -> dict:
    p = resolved["params"]
    cfg = RadicalConfig(
        label_rabi_khz=p["label_rabi_khz"],
        separation_nm=p["separation_nm"],
        cos_theta=p["cos_theta"],
        k_per_us=p["k_per_us"],
        readout_us=p["readout_us"],
    )
    center = cfg.singlet_resonance_khz
    grid = np.arange(
        center - p["grid_span_khz"],
        center + p["grid_span_khz"] + p["grid_step_khz"] / 2,
        p["grid_step_khz"],
    )
    scan = radical_scan(cfg, omega_grid_khz=grid)
    configio.write_scan_csv(out / "scan.csv", scan, resolved)
    dips = find_dips(scan, depth_threshold=0.02)
    configio.write_dips_csv(out / "dips.csv", dips, "kHz", resolved,
                            {"source": "scan.csv",
                             "singlet_resonance_khz": center})
    times = np.linspace(0.0, p["monitor_horizon_us"], p["monitor_points"])
    monitor = radical_monitor(cfg, times_us=times)
    configio.write_trace_csv(out / "monitor.csv", monitor, resolved)
    return {"outputs": ["scan.csv", "dips.csv", "monitor.csv"]}


def _run_bath(resolved: dict, out: Path, jobs: int) -> dict:
    p = resolved["params"]
    seed0 = resolved["seed"]
    field = FieldConfig(b_gauss=p["b_gauss"])
    times = np.linspace(0.0, p["t_max_ms"], p["n_times"])
    driven_sum = np.zeros(p["n_times"])
    undriven_sum = np.zeros(p["n_times"])
    outputs = []
    for k in range(p["n_seeds"]):
        bcfg = BathConfig(
            mode=p["mode"], count=p["count"], radius_nm=p["radius_nm"],
            exclusion_nm=p["exclusion_nm"], seed=seed0 + k,
        )
        bath = sample_bath(bcfg)
        name = f"sites_seed{seed0 + k}.csv"
        configio.write_sites_csv(out / name, bath, resolved)
        outputs.append(name)
        driven, undriven = decoupling_signal(bath, p["rabi_khz"], field, times)
        driven_sum += driven
        undriven_sum += undriven
    n = p["n_seeds"]
    for label, vals in (("driven", driven_sum / n), ("undriven", undriven_sum / n)):
        trace = SignalTrace(times=times, values=np.clip(vals, 0, 1),
                            metadata={"protocol": "bath-decoupling",
                                      "arm": label, "n_seeds": n})
        name = f"{label}.csv"
        configio.write_trace_csv(out / name, trace, resolved)
        outputs.append(name)
    return {"outputs": outputs}


_RUNNERS = {
    "position-scan": _run_position_scan,
    "position-estimate": _run_position_estimate,
    "qnd": _run_qnd,
    "pair": _run_pair,
    "labels": _run_labels,
    "radical": _run_radical,
    "bath-decoupling": _run_bath,
}


def _cmd_run(args) -> int:
    try:
        resolved = configio.load_config(args.config)
    except SchemaError as exc:
        return _fail(2, exc.record())
    except (OSError, ValueError) as exc:
        return _fail(2, {"error": "config", "message": str(exc)})
    if args.seed is not None:
        resolved["seed"] = args.seed
    if args.dry_run:
        print(json.dumps({"plan": resolved,
                          "config_hash": configio.config_hash(resolved)},
                         indent=2, sort_keys=True))
        return 0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        summary = _RUNNERS[resolved["protocol"]](resolved, out, args.jobs)
    except Exception as exc:  # compute failure -> machine-readable record
        return _fail(3, {"error": "compute", "protocol": resolved["protocol"],
                         "message": str(exc)})
    summary["config_hash"] = configio.config_hash(resolved)
    configio.write_json(out / "run.json", summary)
    for warning in summary.get("warnings", []):
        print(json.dumps({"warning": warning}))
    return 0


def _cmd_sweep(args) -> int:
    try:
        resolved = configio.load_config(args.config)
    except SchemaError as exc:
        return _fail(2, exc.record())
    if args.seed is not None:
        resolved["seed"] = args.seed
    axis = args.axis
    if axis not in resolved["params"]:
        return _fail(2, {"error": "schema",
                         "problems": [f"sweep axis {axis!r} not a config param"]})
    if not isinstance(resolved["params"][axis], (int, float)) or isinstance(
        resolved["params"][axis], bool
    ):
        return _fail(2, {"error": "schema",
                         "problems": [f"sweep axis {axis!r} is not numeric"]})
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        return _fail(2, {"error": "schema",
                         "problems": ["sweep values must be numbers"]})
    if not values:
        return _fail(2, {"error": "schema", "problems": ["empty sweep"]})
    if args.dry_run:
        print(json.dumps({"plan": {"axis": axis, "values": values,
                                   "config": resolved}}, indent=2, sort_keys=True))
        return 0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    index_rows = []
    for k, value in enumerate(values):
        sub = dict(resolved)
        sub["params"] = dict(resolved["params"])
        kind = type(configio.PROTOCOLS[resolved["protocol"]][axis].default)
        sub["params"][axis] = kind(value)
        subdir = out / f"{k:03d}_{axis}={configio._fmt(value)}"
        subdir.mkdir(parents=True, exist_ok=True)
        try:
            summary = _RUNNERS[sub["protocol"]](sub, subdir, args.jobs)
        except Exception as exc:
            return _fail(3, {"error": "compute", "axis_value": value,
                             "message": str(exc)})
        index_rows.append((value, subdir.name, summary["outputs"]))
    lines = [f"# nvmr {configio.TOOL_VERSION}", f"# sweep-axis: {axis}",
             "value,directory"]
    for value, name, _ in index_rows:
        lines.append(f"{configio._fmt(value)},{name}")
    (out / "index.csv").write_text("\n".join(lines) + "\n")
    return 0


def _cmd_invert(args) -> int:
    scans = {}
    config = None
    try:
        for path in args.scans:
            grid, values, unit, cfg, meta = configio.read_scan_csv(path)
            direction = meta.get("direction")
            if direction is None:
                return _fail(2, {"error": "schema",
                                 "problems": [f"{path}: scan lacks a direction"]})
            scans[direction] = (grid, values)
            config = config or cfg
    except (OSError, ValueError) as exc:
        return _fail(2, {"error": "config", "message": str(exc)})
    dipset = scan_deltas(scans, depth_threshold=args.depth_threshold)
    try:
        geometry = invert_pair_geometry(dipset.deltas)
    except DegenerateAxisError as exc:
        return _fail(3, {"error": "degenerate-geometry", "message": str(exc)})
    except ValueError as exc:
        return _fail(2, {"error": "schema", "problems": [str(exc)]})
    species = "1H"
    if config and "params" in config:
        species = config["params"].get("species", "1H")
    gamma = GYROMAGNETIC_KHZ_PER_G[species]
    payload = {
        "g_khz": geometry.g_khz,
        "direction": list(geometry.direction),
        "theta_deg": geometry.theta_deg,
        "phi_deg": geometry.phi_deg,
        "distance_nm": distance_from_g(geometry.g_khz, gamma, gamma),
        "species": species,
        "deltas_khz": dipset.deltas,
        "flags": dipset.flags,
        "normalization_residual": geometry.normalization_residual,
        "sign_residual": geometry.sign_residual,
    }
    configio.write_json(args.out, payload)
    return 0


def _cmd_bath_gen(args) -> int:
    try:
        resolved = configio.load_config(args.config)
    except SchemaError as exc:
        return _fail(2, exc.record())
    if resolved["protocol"] != "bath-decoupling":
        return _fail(2, {"error": "schema",
                         "problems": ["bath-gen needs a bath-decoupling config"]})
    if args.seed is not None:
        resolved["seed"] = args.seed
    p = resolved["params"]
    bath = sample_bath(BathConfig(
        mode=p["mode"], count=p["count"], radius_nm=p["radius_nm"],
        exclusion_nm=p["exclusion_nm"], seed=resolved["seed"],
    ))
    configio.write_sites_csv(args.out, bath, resolved)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="nvmr",
        description="NV single-molecule magnetic-resonance simulations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment config")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--dry-run", action="store_true")
    run.set_defaults(func=_cmd_run)

    sweep = sub.add_parser("sweep", help="re-run a config across axis values")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--axis", required=True)
    sweep.add_argument("--values", required=True,
                       help="comma-separated numbers")
    sweep.add_argument("--seed", type=int, default=None)
    sweep.add_argument("--jobs", type=int, default=1)
    sweep.add_argument("--dry-run", action="store_true")
    sweep.set_defaults(func=_cmd_sweep)

    invert = sub.add_parser("invert", help="pair geometry from scan CSVs")
    invert.add_argument("scans", nargs="+")
    invert.add_argument("--out", required=True)
    invert.add_argument("--depth-threshold", type=float, default=0.02)
    invert.set_defaults(func=_cmd_invert)

    bath_gen = sub.add_parser("bath-gen", help="persist a bath realization")
    bath_gen.add_argument("--config", required=True)
    bath_gen.add_argument("--out", required=True)
    bath_gen.add_argument("--seed", type=int, default=None)
    bath_gen.set_defaults(func=_cmd_bath_gen)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

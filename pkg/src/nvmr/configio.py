"""Config-file schema and the CSV/JSON output contract.

Configs are TOML with a top-level ``schema`` version, a ``protocol`` name,
an optional ``seed``, and a ``[params]`` table validated against the
protocol's parameter registry (unknown keys are rejected, missing keys
take their defaults).  Every output embeds the fully resolved config as a
single-line JSON comment, so outputs round-trip: re-parsing the embedded
config reproduces the run.

CSV layout: a commented header block (lines starting with ``#``) carrying
tool version, protocol, config hash, resolved config and column
semantics, then a header row and data rows.  Traces use the three columns
``t,<unit>,S`` (the middle field holds the unit string), scans
``param,<unit>,S``, direction maps ``theta,deg,phi,deg,S`` and dip
reports ``center,depth,width``.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCHEMA_VERSION = 1
TOOL_VERSION = "0.1.0"


class SchemaError(ValueError):
    """Config failed validation; carries a machine-readable record."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems

    def record(self) -> dict:
        return {"error": "schema", "problems": self.problems}


@dataclass(frozen=True)
class ParamSpec:
    default: Any
    kind: type
    choices: tuple | None = None


_NINE = ["x", "y", "z", "x+y", "x-y", "x+z", "x-z", "y+z", "y-z"]

#: Per-protocol parameter registries: name -> ParamSpec.
PROTOCOLS: dict[str, dict[str, ParamSpec]] = {
    "position-scan": {
        "b_gauss": ParamSpec(290.0, float),
        "rf_rabi_khz": ParamSpec(20.0, float),
        "readout_ms": ParamSpec(3.0, float),
        "n_theta": ParamSpec(64, int),
        "n_phi": ParamSpec(64, int),
        "rf_on": ParamSpec(True, bool),
        "include_back_action": ParamSpec(True, bool),
        "p_distance_nm": ParamSpec(5.0, float),
        "hyperfine_theta_deg": ParamSpec(68.233, float),
        "hyperfine_phi_deg": ParamSpec(93.841, float),
        "ph_distance_nm": ParamSpec(0.2, float),
    },
    "position-estimate": {
        "b_gauss": ParamSpec(290.0, float),
        "rf_rabi_khz": ParamSpec(20.0, float),
        "readout_ms": ParamSpec(3.0, float),
        "n_theta": ParamSpec(64, int),
        "n_phi": ParamSpec(64, int),
        "include_back_action": ParamSpec(True, bool),
        "p_distance_nm": ParamSpec(5.0, float),
        "hyperfine_theta_deg": ParamSpec(68.233, float),
        "hyperfine_phi_deg": ParamSpec(93.841, float),
        "ph_distance_nm": ParamSpec(0.2, float),
        "trace_points": ParamSpec(121, int),
    },
    "qnd": {
        "omega_e_mhz": ParamSpec(300.0, float),
        "distance_nm": ParamSpec(8.0, float),
        "readout_us": ParamSpec(6.0, float),
        "grid_min_mhz": ParamSpec(313.5, float),
        "grid_max_mhz": ParamSpec(319.0, float),
        "grid_step_mhz": ParamSpec(0.05, float),
        "n_readouts": ParamSpec(3, int),
    },
    "pair": {
        "target_larmor_khz": ParamSpec(500.0, float),
        "separation_nm": ParamSpec(0.1515, float),
        "pair_theta_deg": ParamSpec(118.2, float),
        "pair_phi_deg": ParamSpec(288.85, float),
        "center_distance_nm": ParamSpec(5.0, float),
        "center_theta_deg": ParamSpec(60.0, float),
        "center_phi_deg": ParamSpec(20.0, float),
        "species": ParamSpec("1H", str, ("1H", "31P", "13C", "e")),
        "readout_ms": ParamSpec(5.0, float),
        "readout_min_ms": ParamSpec(0.5, float),
        "readout_samples": ParamSpec(10, int),
        "grid_span_khz": ParamSpec(70.0, float),
        "grid_step_khz": ParamSpec(0.5, float),
        "directions": ParamSpec(_NINE, list),
    },
    "labels": {
        "label_rabi_khz": ParamSpec(20e3, float),
        "separation_nm": ParamSpec(5.0, float),
        "cos_theta": ParamSpec(1.0, float),
        "center_distance_nm": ParamSpec(0.0, float),  # 0 = auto placement
        "readout_us": ParamSpec(20.0, float),
        "readout_samples": ParamSpec(8, int),
        "grid_step_khz": ParamSpec(4.0, float),
        "equal_couplings": ParamSpec(False, bool),
    },
    "radical": {
        "label_rabi_khz": ParamSpec(100e3, float),
        "separation_nm": ParamSpec(2.0, float),
        "cos_theta": ParamSpec(1.0, float),
        "k_per_us": ParamSpec(1.0, float),
        "readout_us": ParamSpec(3.0, float),
        "grid_span_khz": ParamSpec(1500.0, float),
        "grid_step_khz": ParamSpec(50.0, float),
        "monitor_horizon_us": ParamSpec(8.0, float),
        "monitor_points": ParamSpec(161, int),
    },
    "bath-decoupling": {
        "mode": ParamSpec("fixed-count", str, ("fixed-count", "natural-abundance")),
        "count": ParamSpec(8, int),
        "radius_nm": ParamSpec(4.0, float),
        "exclusion_nm": ParamSpec(1.0, float),
        "rabi_khz": ParamSpec(500.0, float),
        "b_gauss": ParamSpec(290.0, float),
        "t_max_ms": ParamSpec(3.0, float),
        "n_times": ParamSpec(61, int),
        "n_seeds": ParamSpec(1, int),
    },
}


def _coerce(name: str, spec: ParamSpec, value: Any, problems: list[str]) -> Any:
    if spec.kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            problems.append(f"param {name!r} must be a number, got {value!r}")
            return spec.default
        return float(value)
    if spec.kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            problems.append(f"param {name!r} must be an integer, got {value!r}")
            return spec.default
        return int(value)
    if spec.kind is bool:
        if not isinstance(value, bool):
            problems.append(f"param {name!r} must be a boolean, got {value!r}")
            return spec.default
        return value
    if spec.kind is str:
        if not isinstance(value, str):
            problems.append(f"param {name!r} must be a string, got {value!r}")
            return spec.default
        if spec.choices and value not in spec.choices:
            problems.append(f"param {name!r} must be one of {spec.choices}")
        return value
    if spec.kind is list:
        if not isinstance(value, list):
            problems.append(f"param {name!r} must be a list, got {value!r}")
            return spec.default
        return list(value)
    raise AssertionError(f"unhandled spec kind {spec.kind}")


def resolve_config(raw: Mapping[str, Any]) -> dict:
    """Validate a parsed config and expand defaults.

    Raises :class:`SchemaError` with the full problem list; nothing is
    computed from an unvalidated config.
    """
    problems: list[str] = []
    if raw.get("schema") != SCHEMA_VERSION:
        problems.append(
            f"schema must be {SCHEMA_VERSION}, got {raw.get('schema')!r}"
        )
    protocol = raw.get("protocol")
    if protocol not in PROTOCOLS:
        problems.append(
            f"protocol must be one of {sorted(PROTOCOLS)}, got {protocol!r}"
        )
        raise SchemaError(problems)
    registry = PROTOCOLS[protocol]
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        problems.append(f"seed must be an integer, got {seed!r}")
        seed = 0
    params_in = raw.get("params", {})
    if not isinstance(params_in, Mapping):
        problems.append("params must be a table")
        params_in = {}
    unknown = sorted(set(params_in) - set(registry))
    if unknown:
        problems.append(f"unknown params for {protocol}: {unknown}")
    top_unknown = sorted(set(raw) - {"schema", "protocol", "seed", "params"})
    if top_unknown:
        problems.append(f"unknown top-level keys: {top_unknown}")
    params = {}
    for name, spec in registry.items():
        if name in params_in:
            params[name] = _coerce(name, spec, params_in[name], problems)
        else:
            params[name] = spec.default
    if problems:
        raise SchemaError(problems)
    return {
        "schema": SCHEMA_VERSION,
        "protocol": protocol,
        "seed": seed,
        "params": params,
    }


def load_config(path: str | Path) -> dict:
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    return resolve_config(raw)


def config_hash(resolved: Mapping[str, Any]) -> str:
    canonical = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canonical.encode()).hexdigest()


# --------------------------------------------------------------------------
# output files
# --------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _header_lines(kind: str, columns: str, resolved: Mapping[str, Any],
                  meta: Mapping[str, Any] | None = None) -> list[str]:
    lines = [
        f"# nvmr {TOOL_VERSION}",
        f"# schema: {SCHEMA_VERSION}",
        f"# protocol: {resolved['protocol']}",
        f"# kind: {kind}",
        f"# config-hash: {config_hash(resolved)}",
        "# config: " + json.dumps(resolved, sort_keys=True, separators=(",", ":")),
    ]
    if meta:
        lines.append(
            "# meta: " + json.dumps(meta, sort_keys=True, separators=(",", ":"))
        )
    lines.append(f"# columns: {columns}")
    return lines


def write_trace_csv(path: str | Path, trace, resolved: Mapping[str, Any]) -> None:
    unit = trace.time_unit
    lines = _header_lines("trace", f"t,{unit},S", resolved, trace.metadata)
    lines.append(f"t,{unit},S")
    for t, s in zip(trace.times, trace.values):
        lines.append(f"{_fmt(t)},{unit},{_fmt(s)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_scan_csv(path: str | Path, scan, resolved: Mapping[str, Any]) -> None:
    unit = scan.param_unit
    meta = dict(scan.metadata)
    meta["param_name"] = scan.param_name
    meta["readout_time"] = scan.readout_time
    meta["readout_time_unit"] = scan.time_unit
    lines = _header_lines("scan", f"param,{unit},S", resolved, meta)
    lines.append(f"param,{unit},S")
    for x, s in zip(scan.grid, scan.values):
        lines.append(f"{_fmt(x)},{unit},{_fmt(s)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_map_csv(path: str | Path, dmap, resolved: Mapping[str, Any]) -> None:
    meta = dict(dmap.metadata)
    meta["readout_time"] = dmap.readout_time
    meta["readout_time_unit"] = dmap.time_unit
    meta["n_theta"] = len(dmap.theta_grid)
    meta["n_phi"] = len(dmap.phi_grid)
    lines = _header_lines("direction-map", "theta,deg,phi,deg,S", resolved, meta)
    lines.append("theta,deg,phi,deg,S")
    for i, th in enumerate(dmap.theta_grid):
        for j, ph in enumerate(dmap.phi_grid):
            lines.append(
                f"{_fmt(np.rad2deg(th))},deg,{_fmt(np.rad2deg(ph))},deg,"
                f"{_fmt(dmap.values[i, j])}"
            )
    Path(path).write_text("\n".join(lines) + "\n")


def write_dips_csv(path: str | Path, dips: Iterable, unit: str,
                   resolved: Mapping[str, Any],
                   meta: Mapping[str, Any] | None = None) -> None:
    meta = dict(meta or {})
    meta["unit"] = unit
    lines = _header_lines("dips", "center,depth,width", resolved, meta)
    lines.append("center,depth,width")
    for d in dips:
        lines.append(f"{_fmt(d.center)},{_fmt(d.depth)},{_fmt(d.width)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_sites_csv(path: str | Path, sites, resolved: Mapping[str, Any]) -> None:
    lines = _header_lines("sites", "label,species,x_nm,y_nm,z_nm", resolved)
    lines.append("label,species,x_nm,y_nm,z_nm")
    for s in sites:
        x, y, z = s.position_nm
        lines.append(f"{s.label},{s.species},{_fmt(x)},{_fmt(y)},{_fmt(z)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_json(path: str | Path, payload: Mapping[str, Any]) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


@dataclass(frozen=True)
class CsvDocument:
    """Parsed CSV with its commented header block."""

    kind: str
    columns: list[str]
    rows: list[list[str]]
    config: dict | None
    meta: dict


def read_csv(path: str | Path) -> CsvDocument:
    kind = ""
    config = None
    meta: dict = {}
    header: list[str] | None = None
    rows: list[list[str]] = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("kind:"):
                kind = body.split(":", 1)[1].strip()
            elif body.startswith("config:"):
                config = json.loads(body.split(":", 1)[1].strip())
            elif body.startswith("meta:"):
                meta = json.loads(body.split(":", 1)[1].strip())
            continue
        fields = line.split(",")
        if header is None:
            header = fields
        else:
            rows.append(fields)
    if header is None:
        raise ValueError(f"{path}: no CSV header found")
    return CsvDocument(kind=kind, columns=header, rows=rows, config=config, meta=meta)


def read_scan_csv(path: str | Path):
    """Load a scan CSV back into (grid, values, unit, config, meta)."""
    doc = read_csv(path)
    if doc.kind != "scan":
        raise ValueError(f"{path}: expected a scan CSV, found kind={doc.kind!r}")
    unit = doc.columns[1]
    grid = np.array([float(r[0]) for r in doc.rows])
    values = np.array([float(r[2]) for r in doc.rows])
    return grid, values, unit, doc.config, doc.meta

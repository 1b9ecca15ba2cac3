"""Scenario configuration: schema validation and object construction.

Configs are JSON documents (presets are configs too); unknown keys are
rejected before any computation.  CLI flag overrides are applied after
preset/file merging.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path

import jsonschema

from .errors import ConfigError
from .grid import Grid, InitialStateSpec, build_grid
from .hamiltonian import GaugeSpec, HamiltonianSpec, PotentialSpec
from .pite import PiteParams, Schedule
from .evolution import Splitting

_NUM = {"type": "number"}
_POS_INT = {"type": "integer", "minimum": 1}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["grid", "hamiltonian"],
    "properties": {
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n_per_axis", "dims", "box_len_nm"],
            "properties": {
                "n_per_axis": {"type": "integer", "minimum": 1, "maximum": 12},
                "dims": {"type": "integer", "enum": [1, 2, 3]},
                "box_len_nm": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "units_check": {"type": "boolean"},
        "hamiltonian": {
            "type": "object",
            "additionalProperties": False,
            "required": ["mass_ratio", "b_tesla", "potential"],
            "properties": {
                "mass_ratio": {"type": "number", "exclusiveMinimum": 0},
                "b_tesla": _NUM,
                "gauge_center_xg": _NUM,
                "potential": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind"],
                    "properties": {
                        "kind": {"enum": ["harmonic", "double_well", "zero", "table"]},
                        "omega0_mev": _NUM,
                        "v0_mev": _NUM,
                        "vp_mev": _NUM,
                        "a_nm": _NUM,
                        "delta_nm": _NUM,
                        "delta_x_nm": _NUM,
                        "delta_y_nm": _NUM,
                        "table_csv": {"type": "string"},
                    },
                },
            },
        },
        "initial_state": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["gaussian", "exponential", "bonding_s",
                                   "antibonding_s", "bonding_px", "position_basis",
                                   "custom_table"]},
                "x_c_nm": _NUM,
                "width_nm": _NUM,
                "decay_nm": _NUM,
                "well_offset_nm": _NUM,
                "indices": {"type": "array", "items": {"type": "integer"}},
                "table_csv": {"type": "string"},
            },
        },
        "pite": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "m0": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "splitting": {"enum": ["TV", "TVT"]},
                "n_steps": {"type": "integer", "minimum": 0},
                "schedule": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind"],
                    "properties": {
                        "kind": {"enum": ["constant", "ramp"]},
                        "dtau": _NUM,
                        "dtau_min": _NUM,
                        "dtau_max": _NUM,
                        "kappa": _NUM,
                    },
                },
                "energy_shift": {
                    "anyOf": [{"type": "number"}, {"enum": ["target", "none"]}]
                },
                "backend": {"enum": ["trotter", "exact"]},
                "target_state": {"type": "integer", "minimum": 0},
            },
        },
        "filtration": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "order": {"type": "integer", "enum": [1, 2]},
                "substep": {"type": "number", "exclusiveMinimum": 0},
                "propagator": {"enum": ["trotter", "exact"]},
                "targets": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["state", "keep_state"],
                        "properties": {
                            "state": {"type": "integer", "minimum": 0},
                            "keep_state": {"type": "integer", "minimum": 0},
                            "delta_e_mev": _NUM,
                        },
                    },
                },
                "sweep": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "delta_e2_mev": {"type": "array", "items": _NUM},
                        "delta_e5_mev": {"type": "array", "items": _NUM},
                        "orders": {"type": "array", "items": {"enum": [1, 2]}},
                    },
                },
            },
        },
        "observables": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "fields": {"type": "array",
                           "items": {"enum": ["density", "current"]}},
                "d": _POS_INT,
                "source": {"enum": ["pite_final", "eigenstate", "initial"]},
                "state_index": {"type": "integer", "minimum": 0},
                "charge_units": {"type": "boolean"},
                "model": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "mode": {"enum": ["exact", "sampled"]},
                        "shot_count": _POS_INT,
                        "rng_seed": {"type": "integer"},
                    },
                },
            },
        },
        "diagonalize": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "count": {"type": "integer", "minimum": 1, "maximum": 32},
                "b_sweep_tesla": {"type": "array", "items": _NUM},
                "export_eigenvectors": {"type": "boolean"},
                "analytic_comparison": {"type": "boolean"},
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "directory": {"type": "string"},
                "plot": {"type": "boolean"},
            },
        },
    },
}


def validate_config(config: dict) -> dict:
    try:
        jsonschema.validate(config, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise ConfigError(f"invalid config at '{path}': {exc.message}") from exc
    return config


def load_config_file(path: str | Path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc


def merge_config(base: dict, override: dict) -> dict:
    """Recursive dict merge; override wins on scalar conflicts."""
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key in out and isinstance(out[key], dict) and isinstance(value, dict):
            out[key] = merge_config(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _read_table_csv(path: str):
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ConfigError(f"table row needs (k_x, k_y, re, im): {line!r}")
            rows.append((int(parts[0]), int(parts[1]), float(parts[2]),
                         float(parts[3])))
    if not rows:
        raise ConfigError(f"table file {path} holds no rows")
    return rows


def build_objects(config: dict):
    """Construct (grid, hamiltonian_spec, initial_state_spec_or_None,
    pite_params_or_None, schedule_or_None) from a validated config."""
    g = config["grid"]
    grid = build_grid(g["n_per_axis"], g["dims"], g["box_len_nm"])

    h = config["hamiltonian"]
    p = h["potential"]
    if p["kind"] == "harmonic":
        pot = PotentialSpec("harmonic", omega0=p.get("omega0_mev", 0.0))
    elif p["kind"] == "double_well":
        pot = PotentialSpec(
            "double_well", v0=p.get("v0_mev", 0.0), vp=p.get("vp_mev", 0.0),
            a=p.get("a_nm", 0.0), delta=p.get("delta_nm", 1.0),
            delta_x=p.get("delta_x_nm", 1.0), delta_y=p.get("delta_y_nm", 1.0),
        )
    elif p["kind"] == "table":
        import numpy as np

        values = np.loadtxt(p["table_csv"], delimiter=",")
        pot = PotentialSpec("table", table_values=values)
    else:
        pot = PotentialSpec("zero")
    gauge = GaugeSpec(h["b_tesla"], h.get("gauge_center_xg", 0.0))
    spec = HamiltonianSpec(grid, h["mass_ratio"], gauge, pot)

    init_spec = None
    if "initial_state" in config:
        i = config["initial_state"]
        init_spec = InitialStateSpec(
            kind=i["kind"],
            x_c=i.get("x_c_nm", 0.0),
            width=i.get("width_nm", 0.0),
            decay=i.get("decay_nm", 0.0),
            well_offset=i.get("well_offset_nm", 0.0),
            indices=tuple(i.get("indices", ())),
            table=_read_table_csv(i["table_csv"]) if "table_csv" in i else None,
        )

    params = None
    schedule = None
    if "pite" in config:
        pc = config["pite"]
        params = PiteParams(
            m0=pc.get("m0", 0.9),
            splitting=Splitting(pc.get("splitting", "TVT")),
            energy_shift=0.0,  # resolved against the spectrum by the runner
        )
        sc = pc.get("schedule", {"kind": "constant", "dtau": 0.01})
        schedule = Schedule(
            kind=sc["kind"], dtau=sc.get("dtau", 0.0),
            dtau_min=sc.get("dtau_min", 0.0), dtau_max=sc.get("dtau_max", 0.0),
            kappa=sc.get("kappa", 1.0),
        )
    return grid, spec, init_spec, params, schedule

"""Experiment configuration: a single JSON file describing channel,
input law, sweep, estimators and outputs.

Matrices are written as row-major lists of rows whose entries are
``[re, im]`` pairs, so custom interaction operators can be entered
exactly.  Every validation failure reports the offending field path
(e.g. ``channel.kraus[1]``); model-level failures carry the violated
condition name and its numeric witness.

Example::

    {
      "channel": {"kind": "quantum_ge", "p_g": 0.05, "p_b": 0.95, "alpha": 1.0},
      "input_law": [0.5, 0.5],
      "n": 100000,
      "seeds": [1],
      "sweep": {"parameter": "p_b", "values": [0.0, 0.25, 0.5, 0.75, 1.0]},
      "estimators": ["ir"],
      "output": {"csv": "rates.csv", "svg": "rates.svg"}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import channels
from .bounds import AuxiliaryModel, make_auxiliary
from .channels import InputLaw
from .errors import ConfigError, ModelValidationError, QchanrateError

CHANNEL_KINDS = (
    "bsc",
    "gilbert_elliott",
    "quantum_ge",
    "quantum_ge_2qubit",
    "custom_kraus",
    "custom_fsmc",
)

# Channel parameters a sweep may vary, per kind; "n" is sweepable always.
SWEEPABLE = {
    "bsc": {"p"},
    "gilbert_elliott": {"p_g", "p_b"},
    "quantum_ge": {"p_g", "p_b", "alpha"},
    "quantum_ge_2qubit": {"p_g", "p_b", "alpha"},
    "custom_kraus": set(),
    "custom_fsmc": set(),
}

ESTIMATOR_IDS = ("ir", "aux_lower")


@dataclass(frozen=True)
class ChannelSpec:
    kind: str
    params: dict


@dataclass(frozen=True)
class AuxiliarySpec:
    kind: str
    label: str
    params: dict


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    exclude: tuple = ()

    def active_values(self) -> tuple:
        return tuple(v for v in self.values if v not in self.exclude)


@dataclass(frozen=True)
class ExperimentConfig:
    channel: ChannelSpec
    input_law: InputLaw
    n: int
    seeds: tuple[int, ...]
    sweep: SweepSpec
    estimators: tuple[str, ...]
    auxiliaries: tuple[AuxiliarySpec, ...] = ()
    burn_in: int = 0
    point_budget_seconds: float | None = None
    csv_name: str = "results.csv"
    svg_name: str = "results.svg"
    source_path: str | None = field(default=None, compare=False)


def _fail(path: str, msg: str):
    raise ConfigError(path, msg)


def _expect_dict(node, path: str, allowed: set[str]) -> dict:
    if not isinstance(node, dict):
        _fail(path, f"expected an object, got {type(node).__name__}")
    unknown = set(node) - allowed
    if unknown:
        _fail(path, f"unknown keys {sorted(unknown)}; allowed: {sorted(allowed)}")
    return node


def _number(node, path: str) -> float:
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        _fail(path, f"expected a number, got {node!r}")
    return float(node)


def _integer(node, path: str) -> int:
    if isinstance(node, bool) or not isinstance(node, int):
        _fail(path, f"expected an integer, got {node!r}")
    return node


def parse_complex_matrix(node, path: str) -> np.ndarray:
    """Square matrix from row-major rows of [re, im] entry pairs."""
    if not isinstance(node, list) or not node:
        _fail(path, "expected a nonempty list of rows")
    dim = len(node)
    out = np.empty((dim, dim), dtype=complex)
    for i, row in enumerate(node):
        if not isinstance(row, list) or len(row) != dim:
            _fail(f"{path}[{i}]", f"expected a row of {dim} [re, im] pairs")
        for j, entry in enumerate(row):
            if not isinstance(entry, list) or len(entry) != 2:
                _fail(f"{path}[{i}][{j}]", f"expected an [re, im] pair, got {entry!r}")
            out[i, j] = complex(
                _number(entry[0], f"{path}[{i}][{j}][0]"),
                _number(entry[1], f"{path}[{i}][{j}][1]"),
            )
    return out


def _real_array(node, path: str) -> np.ndarray:
    arr = np.asarray(node, dtype=object)
    try:
        return np.asarray(node, dtype=float)
    except (TypeError, ValueError):
        _fail(path, f"expected a numeric array, got shape {arr.shape}")


def _parse_channel(node, path: str) -> ChannelSpec:
    if not isinstance(node, dict):
        _fail(path, "expected an object with a 'kind' key")
    kind = node.get("kind")
    if kind not in CHANNEL_KINDS:
        _fail(f"{path}.kind", f"expected one of {CHANNEL_KINDS}, got {kind!r}")
    params = {k: v for k, v in node.items() if k != "kind"}
    return ChannelSpec(kind, params)


def _build_channel(kind: str, params: dict, path: str):
    """Build (and validate) a channel model from spec params."""
    known = dict(params)

    def take_number(name, default=None, required=False):
        if name not in known:
            if required:
                _fail(f"{path}.{name}", "required parameter missing")
            return default
        return _number(known.pop(name), f"{path}.{name}")

    def take_matrix(name):
        if name not in known:
            return None
        return parse_complex_matrix(known.pop(name), f"{path}.{name}")

    try:
        if kind == "bsc":
            p = take_number("p", required=True)
            model = channels.fsmc_from_dmc(channels.build_bsc(p))
        elif kind == "gilbert_elliott":
            p_g = take_number("p_g", required=True)
            p_b = take_number("p_b", required=True)
            if "transition" not in known:
                _fail(f"{path}.transition", "required parameter missing")
            transition = _real_array(known.pop("transition"), f"{path}.transition")
            initial = None
            if "initial" in known:
                initial = _real_array(known.pop("initial"), f"{path}.initial")
            model = channels.build_gilbert_elliott(p_g, p_b, transition, initial)
        elif kind in ("quantum_ge", "quantum_ge_2qubit"):
            p_g = take_number("p_g", required=True)
            p_b = take_number("p_b", required=True)
            alpha = take_number("alpha", default=0.0)
            h = take_matrix("hamiltonian")
            if h is None:
                h = (
                    channels.DEFAULT_TWO_QUBIT_H
                    if kind == "quantum_ge_2qubit"
                    else channels.DEFAULT_SINGLE_QUBIT_H
                )
            expected_dim = 4 if kind == "quantum_ge_2qubit" else 2
            if h.shape[0] != expected_dim:
                _fail(
                    f"{path}.hamiltonian",
                    f"{kind} needs a {expected_dim}x{expected_dim} generator, got {h.shape[0]}x{h.shape[0]}",
                )
            rho0 = take_matrix("initial_state")
            raw = channels.build_quantum_gilbert_elliott(p_g, p_b, h, alpha, rho0)
            model = channels.compile_transfer_operators(raw)
        elif kind == "custom_fsmc":
            if "kernel" not in known or "initial" not in known:
                _fail(path, "custom_fsmc needs 'kernel' and 'initial'")
            kernel = _real_array(known.pop("kernel"), f"{path}.kernel")
            initial = _real_array(known.pop("initial"), f"{path}.initial")
            model = channels.ClassicalFsmc(kernel, initial)
            channels.require_valid(model)
        elif kind == "custom_kraus":
            for name in ("state_dim", "encodings", "kraus", "measurements"):
                if name not in known:
                    _fail(f"{path}.{name}", "required parameter missing")
            state_dim = _integer(known.pop("state_dim"), f"{path}.state_dim")

            def matrix_list(name):
                node = known.pop(name)
                if not isinstance(node, list) or not node:
                    _fail(f"{path}.{name}", "expected a nonempty list of matrices")
                return np.stack(
                    [parse_complex_matrix(m, f"{path}.{name}[{i}]") for i, m in enumerate(node)]
                )

            encodings = matrix_list("encodings")
            kraus = matrix_list("kraus")
            measurements = matrix_list("measurements")
            unitary = take_matrix("unitary")
            if unitary is None:
                unitary = np.eye(state_dim, dtype=complex)
            rho0 = take_matrix("initial_state")
            if rho0 is None:
                rho0 = np.eye(state_dim, dtype=complex) / state_dim
            raw = channels.QuantumMemoryChannel(
                state_dim=state_dim,
                encodings=encodings,
                kraus=kraus,
                measurements=measurements,
                inter_use_unitary=unitary,
                initial_state=rho0,
            )
            model = channels.compile_transfer_operators(raw)
        else:  # pragma: no cover - kinds are checked at parse time
            _fail(path, f"unsupported channel kind {kind!r}")
    except ConfigError:
        raise
    except ModelValidationError as exc:
        raise ConfigError(path, str(exc)) from exc
    except (ValueError, QchanrateError) as exc:
        raise ConfigError(path, str(exc)) from exc
    if known:
        _fail(path, f"unknown parameters for kind {kind!r}: {sorted(known)}")
    return model


def instantiate_channel(spec: ChannelSpec, override: dict | None = None):
    """Build the channel with sweep overrides applied ('n' excluded)."""
    params = dict(spec.params)
    if override:
        params.update(override)
    return _build_channel(spec.kind, params, "channel")


def build_auxiliary(spec: AuxiliarySpec) -> AuxiliaryModel:
    model = _build_channel(spec.kind, spec.params, f"auxiliaries[{spec.label}]")
    return make_auxiliary(model, spec.label)


_ROOT_KEYS = {
    "channel",
    "input_law",
    "n",
    "seeds",
    "sweep",
    "estimators",
    "auxiliaries",
    "burn_in",
    "point_budget_seconds",
    "output",
}


def load_config(path) -> ExperimentConfig:
    """Parse and fully validate an experiment file.

    The base channel and every auxiliary are built once here, so any
    model-level violation (negative kernel entry, incomplete Kraus set,
    non-unitary evolution, ...) is rejected at parse time with the
    condition name and witness.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            root = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(str(path), "file not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON: {exc}") from None
    _expect_dict(root, "config", _ROOT_KEYS)
    for key in ("channel", "input_law", "sweep"):
        if key not in root:
            _fail(f"config.{key}", "required section missing")

    channel = _parse_channel(root["channel"], "channel")

    law_node = root["input_law"]
    if not isinstance(law_node, list) or not law_node:
        _fail("input_law", "expected a nonempty probability list")
    try:
        input_law = InputLaw(np.asarray(law_node, dtype=float))
    except ValueError as exc:
        raise ConfigError("input_law", str(exc)) from exc

    n = _integer(root.get("n", 100000), "n")
    if n < 1:
        _fail("n", f"n must be >= 1, got {n}")

    seeds_node = root.get("seeds", [0])
    if not isinstance(seeds_node, list) or not seeds_node:
        _fail("seeds", "expected a nonempty list of integers")
    seeds = tuple(_integer(s, f"seeds[{i}]") for i, s in enumerate(seeds_node))
    for i, s in enumerate(seeds):
        if s < 0:
            _fail(f"seeds[{i}]", "seeds must be nonnegative")
    if len(set(seeds)) != len(seeds):
        _fail("seeds", "seeds must be distinct")

    sweep_node = _expect_dict(root["sweep"], "sweep", {"parameter", "values", "exclude"})
    parameter = sweep_node.get("parameter")
    if not isinstance(parameter, str):
        _fail("sweep.parameter", f"expected a string, got {parameter!r}")
    allowed = SWEEPABLE[channel.kind] | {"n"}
    if parameter not in allowed:
        _fail(
            "sweep.parameter",
            f"{parameter!r} is not sweepable for kind {channel.kind!r}; "
            f"allowed: {sorted(allowed)}",
        )
    values_node = sweep_node.get("values")
    if not isinstance(values_node, list) or not values_node:
        _fail("sweep.values", "expected a nonempty list of values")
    if parameter == "n":
        values = tuple(_integer(v, f"sweep.values[{i}]") for i, v in enumerate(values_node))
        if min(values) < 1:
            _fail("sweep.values", "swept n values must be >= 1")
    else:
        values = tuple(_number(v, f"sweep.values[{i}]") for i, v in enumerate(values_node))
    if len(set(values)) != len(values):
        _fail("sweep.values", "sweep values must be distinct")
    exclude_node = sweep_node.get("exclude", [])
    if not isinstance(exclude_node, list):
        _fail("sweep.exclude", "expected a list of values")
    exclude = tuple(
        _number(v, f"sweep.exclude[{i}]") for i, v in enumerate(exclude_node)
    )
    if parameter in ("p", "p_g", "p_b"):
        for i, v in enumerate(values):
            if not 0.0 <= v <= 1.0:
                _fail(f"sweep.values[{i}]", f"{parameter} must lie in [0, 1], got {v}")
    sweep = SweepSpec(parameter, values, exclude)
    if not sweep.active_values():
        _fail("sweep", "every sweep value is excluded")

    est_node = root.get("estimators", ["ir"])
    if not isinstance(est_node, list) or not est_node:
        _fail("estimators", "expected a nonempty list")
    estimators = []
    for i, name in enumerate(est_node):
        if name not in ESTIMATOR_IDS:
            _fail(f"estimators[{i}]", f"expected one of {ESTIMATOR_IDS}, got {name!r}")
        estimators.append(name)

    aux_node = root.get("auxiliaries", [])
    if not isinstance(aux_node, list):
        _fail("auxiliaries", "expected a list")
    auxiliaries = []
    seen_labels = set()
    for i, node in enumerate(aux_node):
        if not isinstance(node, dict) or "kind" not in node:
            _fail(f"auxiliaries[{i}]", "expected an object with a 'kind' key")
        kind = node["kind"]
        if kind not in CHANNEL_KINDS:
            _fail(f"auxiliaries[{i}].kind", f"expected one of {CHANNEL_KINDS}, got {kind!r}")
        label = node.get("label", f"{kind}-{i}")
        if not isinstance(label, str):
            _fail(f"auxiliaries[{i}].label", "expected a string")
        if label in seen_labels:
            _fail(f"auxiliaries[{i}].label", f"duplicate label {label!r}")
        seen_labels.add(label)
        params = {k: v for k, v in node.items() if k not in ("kind", "label")}
        auxiliaries.append(AuxiliarySpec(kind, label, params))
    if "aux_lower" in estimators and not auxiliaries:
        _fail("estimators", "'aux_lower' requires at least one auxiliary model")

    burn_in = _integer(root.get("burn_in", 0), "burn_in")
    if burn_in < 0 or burn_in >= n:
        _fail("burn_in", f"burn_in must lie in [0, n), got {burn_in}")

    budget = root.get("point_budget_seconds")
    if budget is not None:
        budget = _number(budget, "point_budget_seconds")
        if budget <= 0:
            _fail("point_budget_seconds", "must be positive when given")

    out_node = _expect_dict(root.get("output", {}), "output", {"csv", "svg"})
    csv_name = out_node.get("csv", "results.csv")
    svg_name = out_node.get("svg", "results.svg")
    for key, value in (("csv", csv_name), ("svg", svg_name)):
        if not isinstance(value, str) or not value:
            _fail(f"output.{key}", "expected a nonempty file name")

    cfg = ExperimentConfig(
        channel=channel,
        input_law=input_law,
        n=n,
        seeds=seeds,
        sweep=sweep,
        estimators=tuple(estimators),
        auxiliaries=tuple(auxiliaries),
        burn_in=burn_in,
        point_budget_seconds=budget,
        csv_name=csv_name,
        svg_name=svg_name,
        source_path=str(path),
    )
    # Building the base channel and the auxiliaries exercises every model
    # invariant; sweeps re-apply overrides to an already-valid spec.
    model = instantiate_channel(cfg.channel)
    if model.x_size != input_law.x_size:
        _fail(
            "input_law",
            f"has {input_law.x_size} symbols but the channel expects {model.x_size}",
        )
    for aux in cfg.auxiliaries:
        built = build_auxiliary(aux)
        if built.model.x_size != model.x_size or built.model.y_size != model.y_size:
            _fail(
                f"auxiliaries[{aux.label}]",
                "auxiliary alphabets must match the true channel",
            )
    return cfg

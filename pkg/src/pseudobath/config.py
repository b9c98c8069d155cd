"""JSON run-configuration parsing and validation.

Complex numbers travel as two-element [re, im] arrays everywhere.  Every
validation failure names the JSON path of the offending field so config
errors are directly actionable.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .model import (
    BathModel,
    InitialState,
    LorentzPeak,
    ModelError,
    SystemHamiltonian,
)


class ConfigError(Exception):
    """Base class for configuration failures."""


class ParseError(ConfigError):
    """Malformed JSON."""


class ValidationError(ConfigError):
    """Structurally valid JSON with invalid content."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class SolverSettings:
    rtol: float = 1e-9
    atol: float = 1e-12
    oracle_steps: int = 4000


@dataclass(frozen=True)
class RunConfig:
    system: SystemHamiltonian
    bath: BathModel
    initial: InitialState
    t_max: float
    output_points: int
    solver: SolverSettings = field(default_factory=SolverSettings)
    sweep: dict = field(default_factory=dict)


def _get(obj: dict, key: str, path: str, kind=None, required: bool = True, default=None):
    if key not in obj:
        if required:
            raise ValidationError(f"{path}.{key}", "missing required field")
        return default
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise ValidationError(
            f"{path}.{key}", f"expected {getattr(kind, '__name__', kind)}, got {type(val).__name__}"
        )
    return val


def _number(obj, key, path, required=True, default=None):
    val = _get(obj, key, path, required=required, default=default)
    if val is default and not required:
        return default
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ValidationError(f"{path}.{key}", "expected a number")
    return float(val)


def _complex(val, path) -> complex:
    if (
        not isinstance(val, list)
        or len(val) != 2
        or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in val)
    ):
        raise ValidationError(path, "complex values must be [re, im] number pairs")
    return complex(val[0], val[1])


def parse_config(text) -> RunConfig:
    """Parse and validate a JSON configuration document."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("$", "top level must be an object")

    sys_obj = _get(doc, "system", "$", dict)
    n = _get(sys_obj, "n", "$.system")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ValidationError("$.system.n", "expected a positive integer")
    rows = _get(sys_obj, "matrix", "$.system", list)
    if len(rows) != n:
        raise ValidationError("$.system.matrix", f"expected {n} rows, got {len(rows)}")
    matrix = np.zeros((n, n), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise ValidationError(f"$.system.matrix[{i}]", f"expected {n} entries")
        for j, entry in enumerate(row):
            matrix[i, j] = _complex(entry, f"$.system.matrix[{i}][{j}]")
    try:
        system = SystemHamiltonian(matrix)
    except ModelError as exc:
        raise ValidationError("$.system.matrix", str(exc)) from exc

    bath_obj = _get(doc, "bath", "$", dict)
    peaks = []
    for i, p in enumerate(_get(bath_obj, "peaks", "$.bath", list, required=False, default=[])):
        ppath = f"$.bath.peaks[{i}]"
        if not isinstance(p, dict):
            raise ValidationError(ppath, "expected an object")
        g = _number(p, "g", ppath)
        gamma = _number(p, "gamma", ppath)
        epsilon = _number(p, "epsilon", ppath, required=False, default=0.0)
        try:
            peaks.append(LorentzPeak(g=g, gamma=gamma, epsilon=epsilon))
        except ModelError as exc:
            raise ValidationError(ppath, str(exc)) from exc
    eta = _number(bath_obj, "eta", "$.bath", required=False, default=0.0)
    cutoff = None
    if bath_obj.get("cutoff") is not None:
        cutoff = _number(bath_obj, "cutoff", "$.bath")
    try:
        bath = BathModel(peaks=tuple(peaks), eta=eta, cutoff=cutoff)
    except ModelError as exc:
        raise ValidationError("$.bath", str(exc)) from exc

    init_obj = _get(doc, "initial", "$", dict)
    psi_raw = _get(init_obj, "psi", "$.initial", list)
    if len(psi_raw) != n:
        raise ValidationError("$.initial.psi", f"expected {n} entries, got {len(psi_raw)}")
    psi = np.array(
        [_complex(v, f"$.initial.psi[{i}]") for i, v in enumerate(psi_raw)], dtype=complex
    )
    psi0 = _complex(_get(init_obj, "psi0", "$.initial"), "$.initial.psi0")
    try:
        initial = InitialState(psi=psi, psi0=psi0)
    except ModelError as exc:
        raise ValidationError("$.initial", str(exc)) from exc

    time_obj = _get(doc, "time", "$", dict)
    t_max = _number(time_obj, "t_max", "$.time")
    if t_max <= 0.0:
        raise ValidationError("$.time.t_max", "must be positive")
    points = _get(time_obj, "points", "$.time")
    if isinstance(points, bool) or not isinstance(points, int) or points < 2:
        raise ValidationError("$.time.points", "expected an integer >= 2")

    solver_obj = _get(doc, "solver", "$", dict, required=False, default={})
    rtol = _number(solver_obj, "rtol", "$.solver", required=False, default=1e-9)
    atol = _number(solver_obj, "atol", "$.solver", required=False, default=1e-12)
    oracle_steps = _get(solver_obj, "oracle_steps", "$.solver", required=False, default=4000)
    if isinstance(oracle_steps, bool) or not isinstance(oracle_steps, int) or oracle_steps < 10:
        raise ValidationError("$.solver.oracle_steps", "expected an integer >= 10")
    if rtol <= 0.0 or atol <= 0.0:
        raise ValidationError("$.solver", "tolerances must be positive")

    sweep = _get(doc, "sweep", "$", dict, required=False, default={})
    for key, vals in sweep.items():
        if not isinstance(vals, list) or not vals:
            raise ValidationError(f"$.sweep.{key}", "expected a non-empty list of values")

    return RunConfig(
        system=system,
        bath=bath,
        initial=initial,
        t_max=t_max,
        output_points=points,
        solver=SolverSettings(rtol=rtol, atol=atol, oracle_steps=oracle_steps),
        sweep=dict(sweep),
    )


def _complex_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def config_to_dict(cfg: RunConfig) -> dict:
    """Serialize back to the wire schema; parse(serialize(cfg)) is identity."""
    doc = {
        "system": {
            "n": cfg.system.n,
            "matrix": [
                [_complex_pair(cfg.system.matrix[i, j]) for j in range(cfg.system.n)]
                for i in range(cfg.system.n)
            ],
        },
        "bath": {
            "peaks": [
                {"g": p.g, "gamma": p.gamma, "epsilon": p.epsilon} for p in cfg.bath.peaks
            ],
            "eta": cfg.bath.eta,
            "cutoff": cfg.bath.cutoff,
        },
        "initial": {
            "psi": [_complex_pair(z) for z in cfg.initial.psi],
            "psi0": _complex_pair(cfg.initial.psi0),
        },
        "time": {"t_max": cfg.t_max, "points": cfg.output_points},
        "solver": {
            "rtol": cfg.solver.rtol,
            "atol": cfg.solver.atol,
            "oracle_steps": cfg.solver.oracle_steps,
        },
    }
    if cfg.sweep:
        doc["sweep"] = cfg.sweep
    return doc


def config_to_json(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)


def apply_override(doc: dict, dotted_path: str, value):
    """Set a value inside a raw config dict by dotted path, e.g.
    ``bath.peaks[0].g`` or ``bath.eta``.  Used by parameter sweeps."""
    import re

    tokens = []
    for part in dotted_path.split("."):
        m = re.fullmatch(r"([A-Za-z_][A-Za-z_0-9]*)((?:\[\d+\])*)", part)
        if not m:
            raise ValidationError(f"$.sweep.{dotted_path}", f"bad path component {part!r}")
        tokens.append(m.group(1))
        tokens.extend(int(idx) for idx in re.findall(r"\[(\d+)\]", m.group(2)))
    target = doc
    for tok in tokens[:-1]:
        try:
            target = target[tok]
        except (KeyError, IndexError, TypeError) as exc:
            raise ValidationError(
                f"$.sweep.{dotted_path}", f"path does not exist in config: {tok!r}"
            ) from exc
    try:
        target[tokens[-1]] = value
    except (IndexError, TypeError) as exc:
        raise ValidationError(
            f"$.sweep.{dotted_path}", f"cannot assign at {tokens[-1]!r}"
        ) from exc


__all__ = [
    "ConfigError",
    "ParseError",
    "RunConfig",
    "SolverSettings",
    "ValidationError",
    "apply_override",
    "config_to_dict",
    "config_to_json",
    "parse_config",
]

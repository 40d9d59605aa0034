"""Experiment-plan files.

A plan is a JSON object::

    {
      "n_spins": 2,
      "diffusion_m2_per_s": 1.0,
      "events": [{"type": "gradient_pulse", "k_rad_per_m": [1.0, 1.0]}],
      "initial_state": "pauli:xx",
      "model": {"type": "collective"},
      "time_grid": {"t_start_s": 0.0, "t_end_s": 2.0, "steps": 20},
      "observables": ["xx", "yy", "rho[1,2]"]
    }

Event types: ``gradient_pulse`` (``k_rad_per_m`` list or scalar applied to
every spin), ``conditional_sandwich`` (``gate`` and ``inner`` pulse),
``rotation`` (``axis``, ``angle_rad``, ``spins``) and ``diffusion``
(``duration_s``). Diffusion events are fixed periods evaluated before the
time-grid period ``t``.

Model types: ``collective``, ``selective`` and ``conditional`` take their
generator from the events; ``independent`` (``k_rad_per_m``), ``correlated``
(``R1_per_s``, ``R2_per_s``, ``S_per_s``), ``axis`` (``axis``),
``isotropic`` (``k_rad_per_m``) and ``t1`` (``T1_s``, ``rho_eq``).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .gradflow import ConditionalSandwich, Diffusion, Gate, GradientPulse, Rotation
from .popcore import MAX_SPINS, PAULI_LABELS, make_pauli_term, pauli_expand, pauli_string
from .reps import CorrelatedRates
from .serialize import matrix_from_dict

MODEL_TYPES = ("collective", "selective", "conditional", "independent", "correlated", "axis", "isotropic", "t1")
_RHO_ENTRY = re.compile(r"^rho\[(\d+),(\d+)\]$")


class PlanError(ValueError):
    """A plan failed to parse or validate."""


@dataclass(frozen=True, eq=False)
class ExperimentPlan:
    n_spins: int
    diffusion: float
    events: tuple
    initial_state: np.ndarray
    model: dict
    times: np.ndarray
    observables: tuple[str, ...]
    source: dict = field(default_factory=dict)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def rates(self) -> CorrelatedRates:
        m = self.model
        return CorrelatedRates(m["R1_per_s"], m["R2_per_s"], m["S_per_s"])


def _require(obj, key, path, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise PlanError(f"{path}: missing field {key!r}")
    val = obj[key]
    if kind is not None and (not isinstance(val, kind) or isinstance(val, bool)):
        raise PlanError(f"{path}.{key}: expected {_kind_name(kind)}, got {val!r}")
    return val


def _kind_name(kind):
    if kind == (int, float):
        return "a number"
    if isinstance(kind, tuple):
        return " or ".join(k.__name__ for k in kind)
    return kind.__name__


def _number(obj, key, path, minimum=None, positive=False):
    val = float(_require(obj, key, path, (int, float)))
    if not np.isfinite(val):
        raise PlanError(f"{path}.{key}: must be finite, got {val}")
    if minimum is not None and val < minimum:
        raise PlanError(f"{path}.{key}: must be >= {minimum}, got {val}")
    if positive and val <= 0:
        raise PlanError(f"{path}.{key}: must be > 0, got {val}")
    return val


def _spin(val, n_spins, path):
    if isinstance(val, bool) or not isinstance(val, int):
        raise PlanError(f"{path}: spin index must be an integer, got {val!r}")
    if not 1 <= val <= n_spins:
        raise PlanError(f"{path}: spin {val} does not exist (n_spins = {n_spins})")
    return val


def _wavenumbers(obj, path, n_spins):
    k = _require(obj, "k_rad_per_m", path)
    if isinstance(k, (int, float)) and not isinstance(k, bool):
        return (float(k),) * n_spins
    if not isinstance(k, list) or len(k) != n_spins or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in k):
        raise PlanError(f"{path}.k_rad_per_m: expected a number or {n_spins} numbers, got {k!r}")
    return tuple(float(x) for x in k)


def _pulse(obj, path, n_spins):
    if _require(obj, "type", path) != "gradient_pulse":
        raise PlanError(f"{path}.type: expected 'gradient_pulse', got {obj['type']!r}")
    return GradientPulse(_wavenumbers(obj, path, n_spins))


def _gate(obj, path, n_spins):
    kind = _require(obj, "type", path)
    target = _spin(_require(obj, "target", path), n_spins, f"{path}.target")
    if kind == "cnot":
        controls = (_spin(_require(obj, "control", path), n_spins, f"{path}.control"),)
    elif kind == "toffoli":
        raw = _require(obj, "controls", path, list)
        controls = tuple(_spin(c, n_spins, f"{path}.controls[{i}]") for i, c in enumerate(raw))
    else:
        raise PlanError(f"{path}.type: unknown gate {kind!r} (expected 'cnot' or 'toffoli')")
    try:
        return Gate(kind, target, controls)
    except ValueError as exc:
        raise PlanError(f"{path}: {exc}") from None


def _event(obj, path, n_spins):
    kind = _require(obj, "type", path)
    if kind == "gradient_pulse":
        return _pulse(obj, path, n_spins)
    if kind == "conditional_sandwich":
        return ConditionalSandwich(_gate(_require(obj, "gate", path, dict), f"{path}.gate", n_spins),
                                   _pulse(_require(obj, "inner", path, dict), f"{path}.inner", n_spins))
    if kind == "rotation":
        axis = _require(obj, "axis", path, str)
        if axis not in ("x", "y", "z"):
            raise PlanError(f"{path}.axis: expected x, y or z, got {axis!r}")
        spins = _require(obj, "spins", path, list)
        spins = tuple(_spin(s, n_spins, f"{path}.spins[{i}]") for i, s in enumerate(spins))
        return Rotation(axis, _number(obj, "angle_rad", path), spins)
    if kind == "diffusion":
        return Diffusion(_number(obj, "duration_s", path, minimum=0))
    raise PlanError(f"{path}.type: unknown event type {kind!r}")


def _matrix(obj, path, n_spins):
    try:
        a = matrix_from_dict(obj)
    except ValueError as exc:
        raise PlanError(f"{path}: {exc}") from None
    if a.shape != (2**n_spins,) * 2:
        raise PlanError(f"{path}: matrix is {a.shape[0]}x{a.shape[1]}, expected {2**n_spins}x{2**n_spins}")
    if np.abs(a - a.conj().T).max() > 1e-12:
        raise PlanError(f"{path}: density matrix must be Hermitian")
    if abs(np.trace(a) - 1) > 1e-12:
        raise PlanError(f"{path}: density matrix must have unit trace")
    return a


def _state(spec, path, n_spins):
    m = 2**n_spins
    if isinstance(spec, dict):
        return _matrix(spec, path, n_spins)
    if not isinstance(spec, str):
        raise PlanError(f"{path}: expected a preset name or a matrix object, got {spec!r}")
    if spec == "maximally_mixed":
        return np.eye(m, dtype=complex) / m
    if spec.startswith("pseudo_pure"):
        eps = 0.5
        if ":" in spec:
            try:
                eps = float(spec.split(":", 1)[1])
            except ValueError:
                raise PlanError(f"{path}: bad polarization in {spec!r}") from None
        if not 0 <= eps <= 1:
            raise PlanError(f"{path}: polarization must be in [0, 1], got {eps}")
        e = np.zeros((m, m), dtype=complex)
        e[0, 0] = 1
        return (1 - eps) * np.eye(m) / m + eps * e
    if spec.startswith("pauli:"):
        word = spec[6:]
        if len(word) != n_spins or any(c not in PAULI_LABELS for c in word):
            raise PlanError(f"{path}: {word!r} is not a {n_spins}-spin Pauli word")
        return pauli_string(word)
    if spec.startswith("sigma_x:"):
        out = np.zeros((m, m), dtype=complex)
        for i, part in enumerate(spec.split(",")):
            if not part.startswith("sigma_x:") or not part[8:].isdigit():
                raise PlanError(f"{path}: cannot parse {part!r} (expected sigma_x:<spin>)")
            out += make_pauli_term(n_spins, {_spin(int(part[8:]), n_spins, f"{path}[{i}]"): "x"})
        return out
    raise PlanError(f"{path}: unknown initial state {spec!r}")


def _model(obj, path, n_spins, events):
    kind = _require(obj, "type", path, str)
    if kind not in MODEL_TYPES:
        raise PlanError(f"{path}.type: unknown model {kind!r} (expected one of {', '.join(MODEL_TYPES)})")
    out = {"type": kind}
    if kind == "independent":
        out["k_rad_per_m"] = _wavenumbers(obj, path, n_spins)
    elif kind == "isotropic":
        out["k_rad_per_m"] = _number(obj, "k_rad_per_m", path)
    elif kind == "correlated":
        if n_spins != 2:
            raise PlanError(f"{path}: correlated model needs n_spins = 2, got {n_spins}")
        for key in ("R1_per_s", "R2_per_s"):
            out[key] = _number(obj, key, path, minimum=0)
        out["S_per_s"] = _number(obj, "S_per_s", path)
        if not CorrelatedRates(out["R1_per_s"], out["R2_per_s"], out["S_per_s"]).admissible:
            raise PlanError(f"{path}.S_per_s: |S| must not exceed sqrt(R1 R2)")
    elif kind == "axis":
        axis = _require(obj, "axis", path, str)
        if axis not in ("x", "y", "z"):
            raise PlanError(f"{path}.axis: expected x, y or z, got {axis!r}")
        out["axis"] = axis
    elif kind == "t1":
        t1 = _require(obj, "T1_s", path, list)
        if len(t1) != n_spins:
            raise PlanError(f"{path}.T1_s: expected {n_spins} values, got {len(t1)}")
        out["T1_s"] = tuple(_number({"v": x}, "v", f"{path}.T1_s[{i}]", positive=True) for i, x in enumerate(t1))
        out["rho_eq"] = _state(_require(obj, "rho_eq", path), f"{path}.rho_eq", n_spins)
    if kind in ("independent", "correlated", "isotropic", "t1") and events:
        raise PlanError(f"{path}: model {kind!r} does not use events; the event list must be empty")
    return out


def _time_grid(obj, path):
    t0 = _number(obj, "t_start_s", path, minimum=0)
    t1 = _number(obj, "t_end_s", path, minimum=0)
    steps = _require(obj, "steps", path, int)
    if steps < 1:
        raise PlanError(f"{path}.steps: must be >= 1, got {steps}")
    if t1 < t0:
        raise PlanError(f"{path}: time grid must be monotone (t_end_s {t1} < t_start_s {t0})")
    return np.linspace(t0, t1, steps + 1)


def _observables(spec, path, n_spins, rho0):
    if spec is None:
        return tuple(w for w in pauli_expand(rho0).nonzero() if set(w) != {"1"})
    if not isinstance(spec, list):
        raise PlanError(f"{path}: expected a list, got {spec!r}")
    out = []
    for i, name in enumerate(spec):
        if not isinstance(name, str):
            raise PlanError(f"{path}[{i}]: expected a string, got {name!r}")
        hit = _RHO_ENTRY.match(name)
        if hit:
            for idx in hit.groups():
                if int(idx) >= 2**n_spins:
                    raise PlanError(f"{path}[{i}]: index {idx} out of range for {n_spins} spins")
        elif len(name) != n_spins or any(c not in PAULI_LABELS for c in name):
            raise PlanError(f"{path}[{i}]: {name!r} is neither a {n_spins}-spin Pauli word nor rho[i,j]")
        out.append(name)
    return tuple(out)


def parse_plan(doc: dict) -> ExperimentPlan:
    """Validate a decoded plan object."""
    if not isinstance(doc, dict):
        raise PlanError("plan: top level must be a JSON object")
    n = _require(doc, "n_spins", "plan", int)
    if not 1 <= n <= MAX_SPINS:
        raise PlanError(f"plan.n_spins: must be in 1..{MAX_SPINS}, got {n}")
    diff = _number(doc, "diffusion_m2_per_s", "plan", minimum=0) if "diffusion_m2_per_s" in doc else 0.0
    raw_events = doc.get("events", [])
    if not isinstance(raw_events, list):
        raise PlanError(f"plan.events: expected a list, got {raw_events!r}")
    events = tuple(_event(e, f"plan.events[{i}]", n) for i, e in enumerate(raw_events))
    rho0 = _state(_require(doc, "initial_state", "plan"), "plan.initial_state", n)
    model = _model(_require(doc, "model", "plan", dict), "plan.model", n, events)
    times = _time_grid(_require(doc, "time_grid", "plan", dict), "plan.time_grid")
    obs = _observables(doc.get("observables"), "plan.observables", n, rho0)
    return ExperimentPlan(n, diff, events, rho0, model, times, obs, doc)


def loads_plan(text: str) -> ExperimentPlan:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PlanError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_plan(doc)


def load_plan(path) -> ExperimentPlan:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise PlanError(f"cannot read plan {path}: {exc.strerror}") from None
    return loads_plan(text)

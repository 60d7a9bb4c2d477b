"""
Declarative JSON scenarios and their result records.

A scenario file looks like::

    {
      "version": 1,
      "dim": 2,
      "rho": {"pure": [[1, 0], [0, 0]]},
      "slots": [
        {"name": "z", "kets": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]], "labels": ["z+", "z-"]},
        {"name": "zc", "coarsen": "z", "groups": [["z+", "z-"]]},
        {"name": "zr", "rotate_fixing": "z", "fixed": "z+", "angles": []}
      ],
      "queries": [
        {"kind": "abl", "slot": "z", "post": {"slot": "z", "label": "z-"}, "target": "z+"}
      ]
    }

Complex numbers are ``[re, im]`` pairs. ``rho`` is either ``{"pure":
amplitudes}`` or ``{"matrix": rows}``. A query's ``post`` is an amplitude
list or a reference to a ket of an earlier fine slot. Query kinds are
``abl``, ``naive``, ``corrected``, ``oracle``, ``discrepancy`` and
``classical``; see :func:`load_scenario` for their parameters.

Loading validates everything up front and raises :class:`ScenarioError`
with the path of the offending field; nothing is evaluated until
:func:`run_scenario`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from ._complexjson import decode_complex
from .qla import (
    DensityOperator,
    Ket,
    QLAError,
    coarsen,
    pvm_from_kets,
    rotate_fixing_axis,
)
from .retrodict import (
    POST_LABEL,
    ClassicalModel,
    RetrodictionQuery,
    abl,
    classical_retrodict,
    complete_postselection,
    corrected_bayes,
    corrected_marginal,
    extract_classical_model,
    naive_bayes,
    naive_marginal,
    oracle_conditional,
    unmeasured_probability,
)
from .sequence import (
    EventAtom,
    MeasurementPlan,
    UndefinedConditional,
    conditional,
    joint_distribution,
)

SCHEMA_VERSION = 1
UNDEFINED_TOKEN = "undefined (conditioning probability < 1e-14)"
STRICT_GAP = 1e-9
QUERY_KINDS = ("abl", "naive", "corrected", "oracle", "discrepancy", "classical")


class ScenarioError(ValueError):
    """Invalid scenario; ``path`` locates the field, e.g. ``queries[2].target``."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class ResultRecord:
    """Outcome of one query.

    ``value`` is the closed-form result, ``oracle`` the brute-force one,
    ``gap`` their absolute difference; ``None`` means undefined (or, for
    ``gap``, not applicable).
    """

    query: dict
    method: str
    value: float | None
    oracle: float | None
    gap: float | None
    extras: dict = field(default_factory=dict)

    @property
    def undefined(self):
        return self.value is None or self.oracle is None

    def to_dict(self):
        return {
            "query": self.query,
            "method": self.method,
            "value": self.value,
            "oracle": self.oracle,
            "gap": self.gap,
            "extras": self.extras,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["query"], d["method"], d["value"], d["oracle"], d["gap"], d.get("extras", {}))


def records_to_json(records):
    payload = {"version": SCHEMA_VERSION, "records": [r.to_dict() for r in records]}
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def records_from_json(text):
    payload = json.loads(text)
    return [ResultRecord.from_dict(d) for d in payload["records"]]


def strict_violations(records):
    """Indices of undefined records or closed-form/oracle gaps above 1e-9."""
    return [
        i for i, r in enumerate(records)
        if r.undefined or (r.gap is not None and r.gap > STRICT_GAP)
    ]


# ---------------------------------------------------------------------------
# loading

@dataclass
class Scenario:
    dim: int
    rho: DensityOperator
    slots: dict
    queries: list  # (echo dict, evaluator)
    source: str = ""


def _require(obj, key, path, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise ScenarioError(path, f"missing required field {key!r}")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise ScenarioError(f"{path}.{key}", f"expected {getattr(kind, '__name__', kind)}")
    return value


def _complex(data, path, shape):
    try:
        arr = decode_complex(data)
    except (ValueError, TypeError) as exc:
        raise ScenarioError(path, str(exc)) from None
    if arr.shape != shape:
        raise ScenarioError(path, f"expected shape {shape} of [re, im] pairs, got {arr.shape}")
    return arr


def _guard(path, fn, *args):
    try:
        return fn(*args)
    except (QLAError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        raise ScenarioError(path, msg) from None


def _load_rho(data, dim):
    if not isinstance(data, dict) or len(data) != 1 or not {"pure", "matrix"} & set(data):
        raise ScenarioError("rho", 'expected {"pure": amplitudes} or {"matrix": rows}')
    if "pure" in data:
        amps = _complex(data["pure"], "rho.pure", (dim,))
        ket = _guard("rho", Ket, amps)
        return DensityOperator.from_ket(ket)
    m = _complex(data["matrix"], "rho.matrix", (dim, dim))
    return _guard("rho", DensityOperator, m)


def _load_slot(data, dim, slots, path):
    name = _require(data, "name", path, str)
    if name in slots:
        raise ScenarioError(f"{path}.name", f"duplicate slot name {name!r}")
    kinds = [k for k in ("kets", "coarsen", "rotate_fixing") if k in data]
    if len(kinds) != 1:
        raise ScenarioError(path, "slot needs exactly one of 'kets', 'coarsen', 'rotate_fixing'")
    labels = data.get("labels")
    if "kets" in data:
        kets = _require(data, "kets", path, list)
        arrays = [_complex(k, f"{path}.kets[{i}]", (dim,)) for i, k in enumerate(kets)]
        kets = [_guard(f"{path}.kets[{i}]", Ket, a) for i, a in enumerate(arrays)]
        return name, _guard(path, pvm_from_kets, kets, labels)
    if "coarsen" in data:
        base = _slot_ref(data["coarsen"], slots, f"{path}.coarsen")
        groups = _require(data, "groups", path, list)
        return name, _guard(f"{path}.groups", coarsen, base, groups, labels)
    base = _slot_ref(data["rotate_fixing"], slots, f"{path}.rotate_fixing")
    fixed = _require(data, "fixed", path, str)
    angles = _require(data, "angles", path, list)
    return name, _guard(path, rotate_fixing_axis, base, fixed, angles)


def _slot_ref(name, slots, path):
    if name not in slots:
        raise ScenarioError(path, f"unknown slot {name!r}; defined so far: {sorted(slots)}")
    return slots[name]


def _load_post(data, dim, slots, path):
    if isinstance(data, dict):
        slot = _slot_ref(_require(data, "slot", path, str), slots, f"{path}.slot")
        label = _require(data, "label", path, str)
        return _guard(path, slot.ket, label)
    return _guard(path, Ket, _complex(data, path, (dim,)))


def _retrodiction(data, scenario, path):
    slot = _slot_ref(_require(data, "slot", path, str), scenario.slots, f"{path}.slot")
    q = _load_post(_require(data, "post", path), scenario.dim, scenario.slots, f"{path}.post")
    target = _require(data, "target", path, str)
    return _guard(f"{path}.target", RetrodictionQuery, scenario.rho, slot, q, target)


def _undefined_to_none(fn: Callable, *args):
    try:
        return fn(*args)
    except UndefinedConditional:
        return None


def _gap(a, b):
    return None if a is None or b is None else abs(a - b)


def _record(echo, method, value, oracle, **extras):
    return ResultRecord(echo, method, value, oracle, _gap(value, oracle), extras)


def _abl_query(echo, data, scenario, path):
    query = _retrodiction(data, scenario, path)
    method = "abl_fine" if query.slot1.is_fine else "abl_coarse"

    def run():
        return _record(echo, method, _undefined_to_none(abl, query),
                       _undefined_to_none(oracle_conditional, query))
    return run


def _naive_query(echo, data, scenario, path):
    query = _retrodiction(data, scenario, path)
    if not query.slot1.is_fine:
        raise ScenarioError(f"{path}.slot", "naive Bayes needs a fine slot")

    def run():
        value = _undefined_to_none(naive_bayes, query)
        return _record(
            echo, "naive_bayes", value, _undefined_to_none(oracle_conditional, query),
            denominator=unmeasured_probability(query.rho, query.slot2_ket),
            exceeds_one=value is not None and value > 1.0,
        )
    return run


def _corrected_query(echo, data, scenario, path):
    query = _retrodiction(data, scenario, path)

    def run():
        return _record(echo, "corrected_bayes", _undefined_to_none(corrected_bayes, query),
                       _undefined_to_none(oracle_conditional, query))
    return run


def _atoms(data, path):
    if not isinstance(data, list):
        raise ScenarioError(path, "expected a list of [ordinal, label] pairs")
    atoms = []
    for i, a in enumerate(data):
        if not (isinstance(a, list) and len(a) == 2 and isinstance(a[0], int) and isinstance(a[1], str)):
            raise ScenarioError(f"{path}[{i}]", "expected [ordinal, label]")
        atoms.append(_guard(f"{path}[{i}]", EventAtom, a[0], a[1]))
    return atoms


def _oracle_query(echo, data, scenario, path):
    if "plan" not in data:
        query = _retrodiction(data, scenario, path)

        def run():
            value = _undefined_to_none(oracle_conditional, query)
            return _record(echo, "oracle", value, value)
        return run
    names = _require(data, "plan", path, list)
    plan = _guard(f"{path}.plan", MeasurementPlan,
                  [_slot_ref(n, scenario.slots, f"{path}.plan[{i}]") for i, n in enumerate(names)])
    target = _atoms(data.get("target", []), f"{path}.target")
    given = _atoms(data.get("given", []), f"{path}.given")
    for key, atoms in (("target", target), ("given", given)):
        for i, a in enumerate(atoms):
            if a.ordinal > len(plan) or a.label not in plan.slot(a.ordinal):
                raise ScenarioError(f"{path}.{key}[{i}]", f"no outcome {a} in the plan")

    def run():
        dist = joint_distribution(scenario.rho, plan)
        value = _undefined_to_none(conditional, dist, target, given)
        return _record(echo, "oracle", value, value)
    return run


def _discrepancy_query(echo, data, scenario, path):
    slot = _slot_ref(_require(data, "slot", path, str), scenario.slots, f"{path}.slot")
    if not slot.is_fine:
        raise ScenarioError(f"{path}.slot", "the summed marginal needs a fine slot")
    q = _load_post(_require(data, "post", path), scenario.dim, scenario.slots, f"{path}.post")

    def run():
        value = naive_marginal(scenario.rho, slot, q)
        unmeasured = unmeasured_probability(scenario.rho, q)
        return _record(
            echo, "summed_marginal", value, corrected_marginal(scenario.rho, slot, q),
            unmeasured=unmeasured, unmeasured_gap=abs(value - unmeasured),
        )
    return run


def _joint_table_retrodict(model, q_label, p_label):
    # brute force over the explicit (cause, observation) table
    joint = {(p, q): model.prior[p] * model.likelihood[(q, p)]
             for p in model.prior for (q, pp) in model.likelihood if pp == p}
    denom = math.fsum(v for (p, q), v in joint.items() if q == q_label)
    if denom <= 1e-14:
        raise UndefinedConditional(denom)
    return joint[(p_label, q_label)] / denom


def _classical_query(echo, data, scenario, path):
    if "model" in data:
        m = _require(data, "model", path, dict)
        prior = _require(m, "prior", f"{path}.model", dict)
        rows = _require(m, "likelihood", f"{path}.model", list)
        try:
            likelihood = {(q, p): float(v) for q, p, v in rows}
        except (TypeError, ValueError):
            raise ScenarioError(f"{path}.model.likelihood", "expected [q, p, value] rows") from None
        model = _guard(f"{path}.model", ClassicalModel, prior, likelihood)
        q_label = _require(data, "observation", path, str)
        target = _require(data, "target", path, str)
        if target not in model.prior or (q_label, target) not in model.likelihood:
            raise ScenarioError(path, f"unknown observation/target {q_label!r}/{target!r}")

        def run():
            return _record(echo, "classical", _undefined_to_none(classical_retrodict, model, q_label, target),
                           _undefined_to_none(_joint_table_retrodict, model, q_label, target))
        return run
    query = _retrodiction(data, scenario, path)
    if not query.slot1.is_fine:
        raise ScenarioError(f"{path}.slot", "classical extraction needs a fine slot")

    def run():
        model = extract_classical_model(query.rho, query.slot1, complete_postselection(query.slot2_ket))
        return _record(echo, "classical",
                       _undefined_to_none(classical_retrodict, model, POST_LABEL, query.target_label),
                       _undefined_to_none(oracle_conditional, query))
    return run


_BUILDERS = {
    "abl": _abl_query,
    "naive": _naive_query,
    "corrected": _corrected_query,
    "oracle": _oracle_query,
    "discrepancy": _discrepancy_query,
    "classical": _classical_query,
}


def parse_scenario(data: Any, source=""):
    """Validate a decoded scenario document and build its queries."""
    if not isinstance(data, dict):
        raise ScenarioError("<root>", "expected a JSON object")
    version = _require(data, "version", "<root>")
    if version != SCHEMA_VERSION:
        raise ScenarioError("version", f"unsupported version {version!r}, expected {SCHEMA_VERSION}")
    dim = _require(data, "dim", "<root>", int)
    if isinstance(dim, bool) or dim < 1:
        raise ScenarioError("dim", "must be a positive integer")
    rho = _load_rho(_require(data, "rho", "<root>"), dim)
    slots = {}
    for i, s in enumerate(_require(data, "slots", "<root>", list)):
        name, pvm = _load_slot(s, dim, slots, f"slots[{i}]")
        slots[name] = pvm
    scenario = Scenario(dim, rho, slots, [], source)
    for i, q in enumerate(_require(data, "queries", "<root>", list)):
        path = f"queries[{i}]"
        kind = _require(q, "kind", path, str)
        if kind not in _BUILDERS:
            raise ScenarioError(f"{path}.kind", f"unknown kind {kind!r}; expected one of {list(QUERY_KINDS)}")
        scenario.queries.append((q, _BUILDERS[kind](q, q, scenario, path)))
    return scenario


def load_scenario(path):
    """Read and validate a scenario file.

    Raises
    ------
    ScenarioError
        On unreadable JSON or any invalid field.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError("<file>", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("<file>", f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_scenario(data, str(path))


def run_scenario(scenario):
    """Evaluate every query, in file order.

    ``scenario`` may be a :class:`Scenario` or a path.
    """
    if not isinstance(scenario, Scenario):
        scenario = load_scenario(scenario)
    return [run() for _, run in scenario.queries]


def format_value(v):
    return UNDEFINED_TOKEN if v is None else f"{v:.12g}"


def render_table(records):
    """Human-readable table, one row per record."""
    header = ("#", "kind", "method", "value", "oracle", "gap")
    rows = [header]
    for i, r in enumerate(records):
        rows.append((
            str(i),
            r.query.get("kind", ""),
            r.method,
            format_value(r.value),
            format_value(r.oracle),
            "-" if r.gap is None else f"{r.gap:.3g}",
        ))
    widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def scenario_constants(scenario):
    """Short text description of a loaded scenario's state and slots."""
    with np.printoptions(precision=4, suppress=True):
        lines = [f"dim = {scenario.dim}", "rho =", str(np.round(scenario.rho.matrix, 12))]
        for name, pvm in scenario.slots.items():
            kind = "fine" if pvm.is_fine else "coarse"
            lines.append(f"slot {name!r} ({kind}): {', '.join(pvm.labels)}")
    return "\n".join(lines)

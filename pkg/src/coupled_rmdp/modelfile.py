"""JSON model files and CSV output.

A model file looks like::

    {
      "num_states": 2, "num_actions": 1, "horizon": 3, "discount": 1.0,
      "initial": [1.0, 0.0],
      "nominal": {"p": [[[0.0, 1.0]], [[0.0, 1.0]]], "r": [[1.0], [0.0]]},
      "uncertainty": [[{"p": [[0.0, 1.0]], "r": [1.0]}, {"p": [[0.0, 1.0]], "r": [0.0]}], null],
      "budget": {"kind": "discrete", "D": 1}
    }

``horizon: null`` means infinite horizon. ``uncertainty[s]`` is the full
vertex list of state ``s`` with the nominal parameters first; ``null``, an
empty list or a missing trailing entry means the nominal-only set.
``budget`` is optional and defaults to a zero discrete budget.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .horizon import BudgetSpec
from .model import MdpModel, UncertaintySet, check_model


class ModelFileError(ValidationError):
    """Structural problem in a model file, with its location."""


def _array(value, path, shape):
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ModelFileError(f"{path}: expected a numeric array of shape {shape}")
    if arr.shape != shape:
        raise ModelFileError(f"{path}: expected shape {shape}, got {arr.shape}")
    return arr


def _member(doc, key, path="", required=True, default=None):
    if not isinstance(doc, dict):
        raise ModelFileError(f"{path or '<root>'}: expected an object")
    if key not in doc:
        if required:
            raise ModelFileError(f"{path + '.' if path else ''}{key}: missing required member")
        return default
    return doc[key]


def _int(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ModelFileError(f"{path}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ModelFileError(f"{path}: must be >= {minimum}, got {value}")
    return value


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelFileError(f"{path}: expected a number, got {value!r}")
    return float(value)


def model_from_dict(doc):
    """Build ``(model, usets, budget)`` from a parsed JSON document and validate it."""
    S = _int(_member(doc, "num_states"), "num_states", 1)
    A = _int(_member(doc, "num_actions"), "num_actions", 1)
    horizon = _member(doc, "horizon", required=False)
    if horizon is not None:
        horizon = _int(horizon, "horizon", 1)
    discount = _number(_member(doc, "discount", required=False, default=1.0), "discount")
    initial = _array(_member(doc, "initial"), "initial", (S,))
    nominal = _member(doc, "nominal")
    p = _array(_member(nominal, "p", "nominal"), "nominal.p", (S, A, S))
    r = _array(_member(nominal, "r", "nominal"), "nominal.r", (S, A))
    model = MdpModel(p, r, initial, horizon=horizon, discount=discount)

    unc = _member(doc, "uncertainty", required=False, default=None) or []
    if not isinstance(unc, list) or len(unc) > S:
        raise ModelFileError(f"uncertainty: expected an array of at most {S} per-state vertex lists")
    vps, vrs = [], []
    for s in range(S):
        vertices = unc[s] if s < len(unc) else None
        if not vertices:
            vps.append(p[s][None])
            vrs.append(r[s][None])
            continue
        if not isinstance(vertices, list):
            raise ModelFileError(f"uncertainty[{s}]: expected an array of vertices or null")
        vps.append(np.stack([_array(_member(v, "p", f"uncertainty[{s}][{k}]"), f"uncertainty[{s}][{k}].p", (A, S))
                             for k, v in enumerate(vertices)]))
        vrs.append(np.stack([_array(_member(v, "r", f"uncertainty[{s}][{k}]"), f"uncertainty[{s}][{k}].r", (A,))
                             for k, v in enumerate(vertices)]))
    usets = UncertaintySet(tuple(vps), tuple(vrs))

    b = _member(doc, "budget", required=False, default=None) or {"kind": "discrete", "D": 0}
    budget = BudgetSpec(
        kind=str(_member(b, "kind", "budget", required=False, default="discrete")),
        D=_number(_member(b, "D", "budget", required=False, default=0), "budget.D"),
        beta=_number(_member(b, "beta", "budget", required=False, default=1.0), "budget.beta"),
        budget_grid_points=_int(_member(b, "budget_grid", "budget", required=False, default=101),
                                "budget.budget_grid"),
        magnitude_grid_points=_int(_member(b, "magnitude_grid", "budget", required=False, default=11),
                                   "budget.magnitude_grid"),
    )
    if budget.kind == "discrete":
        budget = BudgetSpec("discrete", int(budget.D), budget.beta, budget.budget_grid_points,
                            budget.magnitude_grid_points)
    check_model(model, usets)
    budget.check(model.discount if budget.kind != "discrete" else None)
    return model, usets, budget


def parse_model(path):
    """Read and validate a JSON model file.

    Malformed JSON raises :class:`ModelFileError` with line and column;
    invariant violations raise :class:`~coupled_rmdp.errors.ValidationError`
    listing every violation.
    """
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    return model_from_dict(doc)


def model_to_dict(model: MdpModel, usets: UncertaintySet = None, budget: BudgetSpec = None):
    unc = None
    if usets is not None:
        unc = [
            None if usets.num_vertices(s) == 1 else
            [{"p": vp.tolist(), "r": vr.tolist()} for vp, vr in zip(usets.vertex_p[s], usets.vertex_r[s])]
            for s in range(usets.num_states)
        ]
    doc = {
        "num_states": model.num_states,
        "num_actions": model.num_actions,
        "horizon": model.horizon,
        "discount": model.discount,
        "initial": model.initial_dist.tolist(),
        "nominal": {"p": model.nominal_p.tolist(), "r": model.nominal_r.tolist()},
        "uncertainty": unc,
    }
    if budget is not None:
        doc["budget"] = {
            "kind": budget.kind,
            "D": budget.D,
            "beta": budget.beta,
            "budget_grid": budget.budget_grid_points,
            "magnitude_grid": budget.magnitude_grid_points,
        }
    return doc


def save_model(path, model, usets=None, budget=None):
    Path(path).write_text(json.dumps(model_to_dict(model, usets, budget)) + "\n")


def format_cell(x):
    """Shortest text that parses back to the same number."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(x) for x in row])


def read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]

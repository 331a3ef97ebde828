"""JSON wire formats shared by the service, the CLI, and on-disk files.

Complex matrices are row-major lists of rows whose entries are
``[re, im]`` pairs.  Floats round-trip at full double precision through
Python's shortest-repr JSON encoding.
"""

from __future__ import annotations

import json

import numpy as np

from .deficit import DeficitReport
from .measurement import Measurement, ProductKraus
from .tree import CycleDescriptor, CycleStep, LoccNode, LoccTree


def matrix_to_json(m: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m, dtype=complex)]


def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("matrix JSON must be a list of rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def measurement_to_dict(m: Measurement) -> dict:
    return {
        "party_dims": list(m.party_dims),
        "outcomes": [
            {"weight": float(o.weight), "factors": [matrix_to_json(f) for f in o.factors]}
            for o in m.outcomes
        ],
    }


def measurement_from_dict(data: dict, canonical: bool = False) -> Measurement:
    outcomes = tuple(
        ProductKraus(float(o["weight"]), tuple(matrix_from_json(f) for f in o["factors"]))
        for o in data["outcomes"]
    )
    return Measurement(tuple(int(d) for d in data["party_dims"]), outcomes, canonical=canonical)


def node_to_dict(n: LoccNode) -> dict:
    out: dict = {
        "party": n.party,
        "cumulative_local": None if n.cumulative_local is None else matrix_to_json(n.cumulative_local),
        "children": [node_to_dict(c) for c in n.children],
    }
    if n.leaf_isometries is not None:
        out["leaf_isometries"] = [matrix_to_json(u) for u in n.leaf_isometries]
    return out


def node_from_dict(data: dict) -> LoccNode:
    isoms = data.get("leaf_isometries")
    return LoccNode(
        party=data.get("party"),
        cumulative_local=(
            None if data.get("cumulative_local") is None else matrix_from_json(data["cumulative_local"])
        ),
        children=tuple(node_from_dict(c) for c in data.get("children", [])),
        leaf_isometries=None if isoms is None else tuple(matrix_from_json(u) for u in isoms),
    )


def tree_to_dict(t: LoccTree) -> dict:
    return {"party_dims": list(t.party_dims), "root": node_to_dict(t.root)}


def tree_from_dict(data: dict) -> LoccTree:
    return LoccTree(tuple(int(d) for d in data["party_dims"]), node_from_dict(data["root"]))


def cycle_to_dict(c: CycleDescriptor) -> dict:
    return {
        "entry_povm": [matrix_to_json(e) for e in c.entry_povm],
        "steps": [
            {
                "party": s.party,
                "terminal": matrix_to_json(s.terminal),
                "continuing": matrix_to_json(s.continuing),
            }
            for s in c.steps
        ],
        "contraction": float(c.contraction),
    }


def cycle_from_dict(data: dict) -> CycleDescriptor:
    return CycleDescriptor(
        entry_povm=tuple(matrix_from_json(e) for e in data["entry_povm"]),
        steps=tuple(
            CycleStep(
                int(s["party"]),
                matrix_from_json(s["terminal"]),
                matrix_from_json(s["continuing"]),
            )
            for s in data["steps"]
        ),
        contraction=float(data["contraction"]),
    )


def deficit_report_to_dict(r: DeficitReport) -> dict:
    return {
        "delta": r.delta,
        "ray_counts": list(r.ray_counts),
        "n_outcomes": r.n_outcomes,
        "party_count": r.party_count,
        "margin": r.margin,
        "groups": [
            {
                "party": g.party,
                "multiplicity": g.multiplicity,
                "members": list(g.members),
                "representative": matrix_to_json(g.representative),
            }
            for g in r.groups
        ],
    }


def dumps(data: dict) -> str:
    """Deterministic JSON encoding (stable key order, full float precision)."""
    return json.dumps(data, sort_keys=True, indent=1)


def loads(text: str) -> dict:
    return json.loads(text)

"""JSON scene files.

Top level::

    {"name": str, "ambient_n": int,
     "frame": {"coords": ["y1", "z1", ...]} | {"origin": [...], "axes": [[...], ...]},
     "grid": {"lo": [...], "hi": [...], "cells": [...]},
     "predicate": <node>}

Nodes (``tau`` and ``side`` are optional on every comparison leaf; ``op`` is
one of le, lt, ge, gt, eq)::

    {"type": "true"} | {"type": "false"}
    {"type": "linear", "coeffs": {"y1": 1, "z2": -2}, "const": 0, "op": "eq", "tau": 0.1, "side": "both"}
    {"type": "quadratic", "coeffs": {"y1*y1": 1, "z1": 2}, "const": -1, "op": "le"}
    {"type": "ball", "center": [...4n], "radius": r, "op": "le"}
    {"type": "and" | "or", "args": [<node>, ...]}
    {"type": "not", "arg": <node>}
    {"type": "product", "factors": [<factor>, ...]}
    {"type": "polyhedron", "faces": [{"functional": [[y, z, u, t], ...], "set": <factor>}, ...]}
    {"type": "ref", "name": "<key in top-level 'defs'>"}

A factor is ``{"grid": {...}, "predicate": <node in H^1>}`` rasterized on
its own 4D grid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .quat import Functional, HPoint
from .voxel import (
    And,
    Const,
    Frame,
    GridSpec,
    Linear,
    Not,
    Or,
    Polyhedron,
    Product,
    Quadratic,
    SceneSet,
    ball,
    coord_index,
    rasterize,
)


class SceneError(ValueError):
    pass


@dataclass(frozen=True)
class SceneDoc:
    name: str
    ambient_n: int
    frame: Frame
    grid: GridSpec
    predicate: SceneSet
    raw: dict


def _grid(d: dict) -> GridSpec:
    try:
        return GridSpec(tuple(d["lo"]), tuple(d["hi"]), tuple(d["cells"]))
    except KeyError as exc:
        raise SceneError(f"grid missing field {exc}") from None


def _frame(d: dict | None, n: int) -> Frame:
    if d is None:
        raise SceneError("scene needs a frame")
    if "coords" in d:
        return Frame.coordinate(n, d["coords"], d.get("origin"))
    origin = d.get("origin", [0.0] * (4 * n))
    return Frame(n, np.asarray(origin, dtype=float), np.asarray(d["axes"], dtype=float))


def _vec(coeffs: dict, n: int) -> np.ndarray:
    v = np.zeros(4 * n)
    for k, c in coeffs.items():
        v[coord_index(k)] += float(c)
    return v


def _quad(coeffs: dict, n: int) -> tuple[np.ndarray, np.ndarray]:
    Q = np.zeros((4 * n, 4 * n))
    b = np.zeros(4 * n)
    for k, c in coeffs.items():
        if "*" in k:
            a, bb = (coord_index(s.strip()) for s in k.split("*"))
            Q[a, bb] += float(c) / 2
            Q[bb, a] += float(c) / 2
        else:
            b[coord_index(k)] += float(c)
    return Q, b


def _cmp_kw(node: dict) -> dict:
    return {"op": node.get("op", "le"), "tau": node.get("tau"), "side": node.get("side", "both")}


def parse_predicate(node: dict, n: int, defs: dict | None = None) -> SceneSet:
    defs = defs or {}
    t = node.get("type")
    if t == "true":
        return Const(True, n)
    if t == "false":
        return Const(False, n)
    if t == "linear":
        return Linear(_vec(node.get("coeffs", {}), n), float(node.get("const", 0.0)), **_cmp_kw(node))
    if t == "quadratic":
        Q, b = _quad(node.get("coeffs", {}), n)
        return Quadratic(Q, b, float(node.get("const", 0.0)), **_cmp_kw(node))
    if t == "ball":
        c = node["center"]
        if len(c) != 4 * n:
            raise SceneError("ball centre must have 4n coordinates")
        return ball(c, float(node["radius"]), **_cmp_kw(node))
    if t in ("and", "or"):
        args = tuple(parse_predicate(a, n, defs) for a in node["args"])
        if not args:
            raise SceneError(f"empty {t} node")
        return And(args) if t == "and" else Or(args)
    if t == "not":
        return Not(parse_predicate(node["arg"], n, defs))
    if t == "product":
        return Product(tuple(parse_factor(f, defs) for f in node["factors"]))
    if t == "polyhedron":
        faces = []
        for face in node["faces"]:
            h = HPoint.from_array(np.asarray(face["functional"], dtype=float).reshape(n, 4))
            faces.append((Functional(h), parse_factor(face["set"], defs)))
        return Polyhedron(tuple(faces))
    if t == "ref":
        if node["name"] not in defs:
            raise SceneError(f"unknown ref {node['name']!r}")
        return parse_predicate(defs[node["name"]], n, defs)
    raise SceneError(f"unknown predicate node type {t!r}")


def parse_factor(d: dict, defs: dict | None = None):
    grid = _grid(d["grid"])
    pred = parse_predicate(d["predicate"], 1, defs)
    return rasterize(pred, Frame.quaternion_line(), grid, d.get("tau"))


def parse_scene(doc: dict) -> SceneDoc:
    try:
        n = int(doc["ambient_n"])
        frame = _frame(doc.get("frame"), n)
        grid = _grid(doc["grid"])
        pred = parse_predicate(doc["predicate"], n, doc.get("defs"))
    except KeyError as exc:
        raise SceneError(f"scene missing field {exc}") from None
    except SceneError:
        raise
    except (TypeError, ValueError) as exc:
        raise SceneError(str(exc)) from exc
    return SceneDoc(doc.get("name", "scene"), n, frame, grid, pred, doc)


def load_scene(path: str | Path) -> SceneDoc:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(path)
    with path.open() as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SceneError(f"{path}: {exc}") from None
    return parse_scene(doc)


SCENE_DIR = Path(__file__).parent / "scenes"


def packaged_scene(name: str) -> SceneDoc:
    return load_scene(SCENE_DIR / f"{name}.json")

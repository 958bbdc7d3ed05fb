"""Polygon document schemas and deterministic JSON serialization.

Spatial documents carry a closed polygon and an optional node field::

    {"n": 4, "nodes": [[x, y, z], ...], "field": [[...], ...],
     "origin": [0, 0, 0], "indexing": "node"}

``indexing`` is "node" for integer-indexed slots and "edge" when slot k
holds the value at index k + 1/2; the tag keeps the half-integer convention
in-band.  Planar pair documents use ``{"n": ..., "x": [[x, y], ...],
"u": [[x, y], ...]}``.

Serialization is byte-deterministic: keys sorted, floats rendered with 17
significant digits (round-trip exact for doubles).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .cyclic import NodeSeq
from .errors import ValidationError
from .invariants import FramedPolygon
from .pedal import PlanarPair


@dataclass(frozen=True)
class PolygonDocument:
    n: int
    nodes: np.ndarray
    field: np.ndarray | None = None
    origin: np.ndarray | None = None
    indexing: str = "node"


@dataclass
class VerificationReport:
    instances: int
    checks_per_instance: int
    passes: int
    failures: list[dict]
    flattening_histogram: dict[int, int]
    sigma_observed: int | None
    elapsed_seconds: float

    def to_json_obj(self) -> dict:
        return {
            "instances": self.instances,
            "checks_per_instance": self.checks_per_instance,
            "passes": self.passes,
            "failures": self.failures,
            "flattening_histogram": {str(k): v for k, v in sorted(self.flattening_histogram.items())},
            "sigma_observed": self.sigma_observed,
            "elapsed_seconds": self.elapsed_seconds,
        }


def _rows(obj, name: str, width: int) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} must be an array of numbers") from exc
    if arr.ndim != 2 or arr.shape[1] != width:
        raise ValidationError(f"{name} must be a list of {width}-element arrays")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} entries must be finite")
    return arr


def parse_polygon_document(obj: dict) -> PolygonDocument:
    if not isinstance(obj, dict):
        raise ValidationError("document must be a JSON object")
    try:
        n = int(obj["n"])
    except (KeyError, TypeError, ValueError):
        raise ValidationError("document needs an integer n")
    nodes = _rows(obj.get("nodes"), "nodes", 3)
    if nodes.shape[0] != n:
        raise ValidationError("nodes length does not match n")
    fld = None
    if obj.get("field") is not None:
        fld = _rows(obj["field"], "field", 3)
        if fld.shape[0] != n:
            raise ValidationError("field length does not match n")
    origin = np.zeros(3)
    if obj.get("origin") is not None:
        origin = np.asarray(obj["origin"], dtype=float).reshape(3)
        if not np.all(np.isfinite(origin)):
            raise ValidationError("origin entries must be finite")
    indexing = obj.get("indexing", "node")
    if indexing not in ("node", "edge"):
        raise ValidationError('indexing must be "node" or "edge"')
    return PolygonDocument(n=n, nodes=nodes, field=fld, origin=origin, indexing=indexing)


def parse_planar_document(obj: dict) -> PlanarPair:
    if not isinstance(obj, dict):
        raise ValidationError("document must be a JSON object")
    try:
        n = int(obj["n"])
    except (KeyError, TypeError, ValueError):
        raise ValidationError("document needs an integer n")
    x = _rows(obj.get("x"), "x", 2)
    u = _rows(obj.get("u"), "u", 2)
    if x.shape[0] != n:
        raise ValidationError("x length does not match n")
    if u.shape[0] != n:
        raise ValidationError("u length does not match n")
    return PlanarPair(NodeSeq(x), NodeSeq(u))


def document_to_framed(doc: PolygonDocument) -> FramedPolygon:
    if doc.field is None:
        raise ValidationError("document carries no field")
    return FramedPolygon(NodeSeq(doc.nodes), NodeSeq(doc.field), doc.origin)


def framed_to_document(P: FramedPolygon, indexing: str = "node") -> dict:
    return {
        "n": P.n,
        "nodes": P.X.values.tolist(),
        "field": P.U.values.tolist(),
        "origin": P.origin.tolist(),
        "indexing": indexing,
    }


def load_document(path: str) -> dict:
    try:
        if path == "-":
            import sys

            return json.load(sys.stdin)
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"input is not valid JSON: {exc}") from exc
    except OSError as exc:
        raise ValidationError(f"cannot read input: {exc}") from exc


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite numbers cannot be serialized")
    if x == int(x) and abs(x) < 1e16:
        return repr(float(x))  # keeps a trailing .0 so the type survives
    return format(x, ".17g")


def dump_json(obj, indent: int = 0) -> str:
    """Deterministic JSON: sorted keys, 17-significant-digit floats."""
    pad = " " * indent
    inner = " " * (indent + 2)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [dump_json(v, indent + 2) for v in obj]
        if all(len(s) <= 24 and "\n" not in s for s in items) and len(items) <= 16:
            return "[" + ", ".join(items) + "]"
        return "[\n" + ",\n".join(inner + s for s in items) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = []
        for key in sorted(obj):
            if not isinstance(key, str):
                raise TypeError("JSON object keys must be strings")
            parts.append(f"{inner}{json.dumps(key)}: {dump_json(obj[key], indent + 2)}")
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")

"""JSON encoding of instances.

A matrix is ``{"rows": r, "cols": c, "data": [[re, im], ...]}`` with entries
in row-major order.  An instance file is ``{"kind": ..., "payload": {...}}``
where kind is one of data_set, omega, quadruple, system, schur_param or
blocked.  Floats are written with Python's shortest round-trip repr, so
decode(encode(x)) reproduces ``x`` bit for bit.
"""

from __future__ import annotations

import json
import os
import sys
import tempfile

import numpy as np

from .errors import ParseError, RedliftError
from .lifting import LiftingDataSet, UnderlyingContraction
from .opcore import BlockOperator
from .redheffer import RedhefferQuadruple, SchurParameter
from .systems import LinearSystem

KINDS = ("data_set", "omega", "quadruple", "system", "schur_param", "blocked")


def encode_matrix(m) -> dict:
    m = np.asarray(m, dtype=complex)
    flat = m.reshape(-1)
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]),
            "data": [[float(z.real), float(z.imag)] for z in flat]}


def decode_matrix(obj, name="matrix") -> np.ndarray:
    try:
        r, c, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{name}: expected rows, cols and data") from exc
    if r < 0 or c < 0 or len(data) != r * c:
        raise ParseError(f"{name}: data has {len(data)} entries, expected {r * c}")
    try:
        vals = np.array([complex(float(re), float(im)) for re, im in data], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{name}: entries must be [re, im] pairs") from exc
    return vals.reshape(r, c)


def _encode_system(s: LinearSystem) -> dict:
    return {"Z": encode_matrix(s.state_op), "B": encode_matrix(s.input_op),
            "C": encode_matrix(s.output_op), "D": encode_matrix(s.feed_op)}


def _decode_system(p) -> LinearSystem:
    return LinearSystem(*(decode_matrix(p[k], k) for k in ("Z", "B", "C", "D")))


def encode(obj, meta: dict | None = None) -> dict:
    """Wrap a library object in an instance dictionary."""
    if isinstance(obj, LiftingDataSet):
        kind = "data_set"
        payload = {"A": encode_matrix(obj.A), "Tprime": encode_matrix(obj.Tprime),
                   "R": encode_matrix(obj.R), "Q": encode_matrix(obj.Q), "K": obj.K}
    elif isinstance(obj, UnderlyingContraction):
        kind = "omega"
        payload = {"omega1": encode_matrix(obj.omega1), "omega2": encode_matrix(obj.omega2),
                   "F_embedding": encode_matrix(obj.F_embedding)}
    elif isinstance(obj, RedhefferQuadruple):
        kind = "quadruple"
        payload = {"system": _encode_system(obj.realization), "split_index": obj.split_index}
    elif isinstance(obj, LinearSystem):
        kind = "system"
        payload = _encode_system(obj)
    elif isinstance(obj, SchurParameter):
        kind = "schur_param"
        payload = {"open_ball": bool(obj.open_ball), "admission_K": obj.admission_K}
        if obj.is_constant:
            payload["constant"] = encode_matrix(obj.system.feed_op)
        else:
            payload["system"] = _encode_system(obj.system)
    elif isinstance(obj, BlockOperator):
        kind = "blocked"
        payload = {"matrix": encode_matrix(obj.matrix), "row_split": obj.row_split,
                   "col_split": obj.col_split}
    else:
        raise TypeError(f"cannot encode {type(obj).__name__}")
    out = {"kind": kind, "payload": payload}
    if meta:
        out["meta"] = meta
    return out


def decode(doc: dict):
    """Inverse of ``encode``; raises ParseError on malformed input."""
    if not isinstance(doc, dict) or "kind" not in doc or "payload" not in doc:
        raise ParseError("instance must have kind and payload")
    kind, p = doc["kind"], doc["payload"]
    if kind not in KINDS:
        raise ParseError(f"unknown kind {kind!r}")
    try:
        if kind == "data_set":
            return LiftingDataSet(*(decode_matrix(p[k], k) for k in ("A", "Tprime", "R", "Q")),
                                  K=int(p.get("K", 16)))
        if kind == "omega":
            return UnderlyingContraction(*(decode_matrix(p[k], k)
                                           for k in ("omega1", "omega2", "F_embedding")))
        if kind == "quadruple":
            return RedhefferQuadruple(_decode_system(p["system"]), int(p["split_index"]))
        if kind == "system":
            return _decode_system(p)
        if kind == "schur_param":
            if "constant" in p:
                sys_ = LinearSystem.static(decode_matrix(p["constant"], "constant"))
            else:
                sys_ = _decode_system(p["system"])
            return SchurParameter(sys_, bool(p["open_ball"]), int(p.get("admission_K", 16)))
        return BlockOperator(decode_matrix(p["matrix"], "matrix"), int(p["row_split"]),
                             int(p["col_split"]))
    except KeyError as exc:
        raise ParseError(f"{kind}: missing field {exc}") from exc
    except RedliftError:
        raise
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{kind}: {exc}") from exc


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg})") from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc


def load(path: str):
    return decode(read_json(path))


def write_text(path: str, text: str):
    if path == "-":
        sys.stdout.write(text)
    else:
        # write to a sibling temp file, then rename, so readers never see a partial file
        d = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=d, prefix=".redlift-")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise

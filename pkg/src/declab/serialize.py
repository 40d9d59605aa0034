"""JSON matrix files.

Matrices are stored as ``{"rows", "cols", "re", "im"}`` with row-major value
lists. Floats are written with ``repr`` precision, so write -> read -> write
reproduces the same bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .reps import ExtendedKrausCoeffs, KrausSet, LindbladSet


def matrix_to_dict(a) -> dict:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {a.shape}")
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "re": [float(x) for x in a.real.ravel()],
        "im": [float(x) for x in a.imag.ravel()],
    }


def matrix_from_dict(d: dict) -> np.ndarray:
    try:
        rows, cols = int(d["rows"]), int(d["cols"])
        re = np.asarray(d["re"], dtype=float)
        im = np.asarray(d.get("im", [0.0] * (rows * cols)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix record: {exc}") from None
    if re.size != rows * cols or im.size != rows * cols:
        raise ValueError(f"matrix record has {re.size}/{im.size} values for a {rows}x{cols} matrix")
    # assign parts separately so signed zeros survive the round trip
    out = np.empty(rows * cols, dtype=complex)
    out.real, out.imag = re, im
    return out.reshape(rows, cols)


def dumps(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def damping_doc(w, t: float) -> dict:
    w = np.asarray(w)
    return {"kind": "damping", "n_spins": int(w.shape[0]).bit_length() - 1, "t_s": float(t),
            "matrix": matrix_to_dict(w)}


def lindblad_doc(lset: LindbladSet) -> dict:
    doc = {"kind": "lindblad", "n_spins": lset.n_spins, "ops": [matrix_to_dict(op) for op in lset.ops]}
    if lset.note:
        doc["note"] = lset.note
    return doc


def kraus_doc(ks: KrausSet, t: float) -> dict:
    return {"kind": "kraus", "n_spins": ks.n_spins, "t_s": float(t),
            "ops": [matrix_to_dict(op) for op in ks.ops]}


def extended_doc(coeffs: ExtendedKrausCoeffs, t: float) -> dict:
    return {"kind": "extended_kraus", "n_spins": coeffs.n_spins, "t_s": float(t),
            "c": matrix_to_dict(coeffs.c)}


def from_doc(doc: dict):
    """Rebuild the object described by a channel document."""
    kind = doc.get("kind")
    if kind == "damping":
        return matrix_from_dict(doc["matrix"])
    if kind == "lindblad":
        return LindbladSet(doc["n_spins"], tuple(matrix_from_dict(m) for m in doc["ops"]), doc.get("note", ""))
    if kind == "kraus":
        return KrausSet(doc["n_spins"], tuple(matrix_from_dict(m) for m in doc["ops"]))
    if kind == "extended_kraus":
        return ExtendedKrausCoeffs(doc["n_spins"], matrix_from_dict(doc["c"]))
    raise ValueError(f"unknown document kind {kind!r}")


def to_doc(obj, t: float = 0.0) -> dict:
    if isinstance(obj, LindbladSet):
        return lindblad_doc(obj)
    if isinstance(obj, KrausSet):
        return kraus_doc(obj, t)
    if isinstance(obj, ExtendedKrausCoeffs):
        return extended_doc(obj, t)
    return damping_doc(obj, t)


def write_doc(path, doc: dict) -> None:
    Path(path).write_text(dumps(doc))


def read_doc(path) -> dict:
    return json.loads(Path(path).read_text())

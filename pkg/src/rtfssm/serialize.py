"""On-disk formats: JSON parameter files and CSV signal files.

Parameters (version 1)::

    {"version": 1, "state_size": n, "channels": d, "num_denominators": m,
     "h0": [d], "a": [[n] * m], "b": [[n] * d],
     "numerator_form": "corrected" | "truncated", "trained_length": int | null}

Signals are CSV with header ``t,c0,c1,...`` and one row per time step.
Floats are written with 17 significant digits so text round-trips exactly.
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .convert import ModalParams
from .core import RtfParams
from .errors import InvalidParams, ParseError, SchemaError, VersionError
from .statespace import DenseSsm

FORMAT_VERSION = 1
PARAM_KEYS = (
    "version",
    "state_size",
    "channels",
    "num_denominators",
    "h0",
    "a",
    "b",
    "numerator_form",
    "trained_length",
)


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top level must be a JSON object")
    return doc


def write_json(doc: dict, path):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _check_version(doc: dict, path):
    if "version" not in doc:
        raise SchemaError(f"{path}: missing 'version'")
    if doc["version"] != FORMAT_VERSION:
        raise VersionError(f"{path}: unsupported version {doc['version']!r}")


def _float_array(value, shape, name):
    try:
        arr = np.array(value, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"'{name}' is not a numeric array: {exc}") from exc
    if arr.shape != shape:
        raise SchemaError(f"'{name}' has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise SchemaError(f"'{name}' contains non-finite values")
    return arr


def _positive_int(doc, key):
    value = doc.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise SchemaError(f"'{key}' must be a positive integer, got {value!r}")
    return value


def params_from_doc(doc: dict, path="<params>") -> RtfParams:
    _check_version(doc, path)
    unknown = set(doc) - set(PARAM_KEYS)
    if unknown:
        raise SchemaError(f"{path}: unknown keys {sorted(unknown)}")
    n = _positive_int(doc, "state_size")
    d = _positive_int(doc, "channels")
    m = _positive_int(doc, "num_denominators")
    if d % m:
        raise SchemaError(f"{path}: num_denominators {m} does not divide channels {d}")
    form = doc.get("numerator_form")
    if form not in ("corrected", "truncated"):
        raise SchemaError(f"{path}: numerator_form must be 'corrected' or 'truncated'")
    tl = doc.get("trained_length")
    if form == "truncated":
        if not isinstance(tl, int) or isinstance(tl, bool) or tl < 1:
            raise SchemaError(f"{path}: truncated form needs a positive trained_length")
    elif tl is not None:
        raise SchemaError(f"{path}: trained_length must be null for the corrected form")
    a = _float_array(doc.get("a"), (m, n), "a")
    b = _float_array(doc.get("b"), (d, n), "b")
    h0 = _float_array(doc.get("h0"), (d,), "h0")
    try:
        return RtfParams(a=a, b=b, h0=h0, numerator_form=form, trained_length=tl)
    except InvalidParams as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def params_to_doc(params: RtfParams) -> dict:
    return {
        "version": FORMAT_VERSION,
        "state_size": params.state_size,
        "channels": params.channels,
        "num_denominators": params.num_denominators,
        "h0": [float(x) for x in params.h0],
        "a": [[float(x) for x in row] for row in params.a],
        "b": [[float(x) for x in row] for row in params.b],
        "numerator_form": params.numerator_form,
        "trained_length": params.trained_length,
    }


def load_params(path) -> RtfParams:
    return params_from_doc(read_json(path), path)


def save_params(params: RtfParams, path):
    write_json(params_to_doc(params), path)


def save_signal(values, path):
    """Write a (channels, length) or (length,) array as a signal CSV."""
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    d, L = values.shape
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t"] + [f"c{c}" for c in range(d)])
        for t in range(L):
            writer.writerow([str(t)] + [fmt_float(v) for v in values[:, t]])


def load_signal(path) -> np.ndarray:
    """Read a signal CSV into a (channels, length) array."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = rows[0]
    d = len(header) - 1
    if d < 1 or header[0] != "t" or header[1:] != [f"c{c}" for c in range(d)]:
        raise SchemaError(f"{path}: header must be t,c0,c1,...")
    out = np.empty((d, len(rows) - 1))
    for i, row in enumerate(rows[1:]):
        if len(row) != d + 1:
            raise SchemaError(f"{path}: row {i + 1} has {len(row)} fields, expected {d + 1}")
        try:
            t = int(row[0])
            vals = [float(v) for v in row[1:]]
        except ValueError as exc:
            raise ParseError(f"{path}: row {i + 1}: {exc}") from exc
        if t != i:
            raise SchemaError(f"{path}: time index {t} at row {i + 1}, expected {i}")
        if not all(math.isfinite(v) for v in vals):
            raise SchemaError(f"{path}: non-finite sample at row {i + 1}")
        out[:, i] = vals
    return out


def ssm_to_doc(systems) -> dict:
    return {
        "version": FORMAT_VERSION,
        "systems": [
            {
                "A": s.A.tolist(),
                "B": s.B.tolist(),
                "C": s.C.tolist(),
                "h0": float(s.h0),
            }
            for s in systems
        ],
    }


def ssm_from_doc(doc: dict, path="<ssm>") -> list:
    _check_version(doc, path)
    systems = doc.get("systems")
    if not isinstance(systems, list) or not systems:
        raise SchemaError(f"{path}: 'systems' must be a non-empty list")
    out = []
    for i, s in enumerate(systems):
        try:
            A = np.array(s["A"], dtype=np.float64)
            n = A.shape[0] if A.ndim == 2 else -1
            out.append(
                DenseSsm(
                    _float_array(s["A"], (n, n), f"systems[{i}].A"),
                    _float_array(s["B"], (n,), f"systems[{i}].B"),
                    _float_array(s["C"], (n,), f"systems[{i}].C"),
                    float(s.get("h0", 0.0)),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}: systems[{i}]: {exc}") from exc
    return out


def modal_to_doc(modals) -> dict:
    return {
        "version": FORMAT_VERSION,
        "channels": [
            {
                "poles": [[float(p.real), float(p.imag)] for p in m.poles],
                "residues": [[float(r.real), float(r.imag)] for r in m.residues],
                "h0": float(m.h0),
            }
            for m in modals
        ],
    }


def modal_from_doc(doc: dict, path="<modal>") -> list:
    _check_version(doc, path)
    out = []
    for i, ch in enumerate(doc.get("channels", [])):
        try:
            poles = np.array(ch["poles"], dtype=np.float64).reshape(-1, 2)
            res = np.array(ch["residues"], dtype=np.float64).reshape(-1, 2)
            out.append(
                ModalParams(
                    residues=res[:, 0] + 1j * res[:, 1],
                    poles=poles[:, 0] + 1j * poles[:, 1],
                    h0=float(ch.get("h0", 0.0)),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}: channels[{i}]: {exc}") from exc
    return out


"""Readers for the JSON reports and CSV tables the kwmspec CLI writes.

Only parsing and shape checks live here; every number is taken verbatim
from the artifact (no spectral math happens in this package).  All
failures raise SchemaError with a message naming the offending field.
"""

import csv
import json
import math

import numpy as np

ENVELOPE_KEYS = {"verdict", "margins", "data"}


class SchemaError(Exception):
    """An input file does not match the expected schema."""


def load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read input ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc


def unwrap(payload):
    """Report envelopes carry the useful object under 'data'."""
    if isinstance(payload, dict) and ENVELOPE_KEYS.issubset(payload.keys()):
        payload = payload["data"]
    if not isinstance(payload, dict):
        raise SchemaError("data: expected a JSON object")
    return payload


def _field(payload, dotted):
    node = payload
    for name in dotted.split("."):
        if not isinstance(node, dict) or name not in node:
            raise SchemaError(f"{dotted}: field missing")
        node = node[name]
    return node


def _complex_matrix(raw, where):
    arr = np.asarray(raw, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2 and arr.shape[0] == arr.shape[1]:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2 and arr.shape[0] == arr.shape[1]:
        return arr.astype(complex)
    raise SchemaError(f"{where}: expected a square matrix of [re, im] pairs")


def parse_spectrum(payload):
    """Grid-form spectrum on the integer dual group, as the density and
    photon plots need it: thetas, (n, d, d) complex values, atom list."""
    payload = unwrap(payload)
    group = _field(payload, "group")
    if _field(group, "kind") != "Z":
        raise SchemaError("group.kind: the theta axis needs the integer "
                          f"group 'Z', got {group['kind']!r}")
    density = _field(payload, "density")
    if _field(density, "form") != "grid":
        raise SchemaError("density.form: renderer takes 'grid' values; "
                          "convert upstream (to-spectrum emits fourier form)")
    raw_values = _field(density, "values")
    count = int(_field(group, "dual_grid_size"))
    if not isinstance(raw_values, list) or len(raw_values) != count:
        raise SchemaError("density.values: expected one matrix per dual "
                          f"grid point ({count})")
    values = np.stack([_complex_matrix(v, f"density.values[{j}]")
                       for j, v in enumerate(raw_values)])
    atoms = []
    for j, atom in enumerate(payload.get("atoms") or []):
        theta = float(_field(atom, "theta"))
        weight = _complex_matrix(_field(atom, "weight"), f"atoms[{j}].weight")
        atoms.append((theta, weight))
    thetas = 2.0 * math.pi * np.arange(count) / count
    return {"thetas": thetas, "values": values, "atoms": atoms,
            "dim": int(values.shape[1])}


def parse_margin_report(payload):
    """Per-point eigenvalue margins out of a validate-spectrum report."""
    payload = unwrap(payload)
    conditions = payload.get("conditions")
    if not isinstance(conditions, list):
        raise SchemaError("conditions: field missing; input must be a "
                          "validate-spectrum report")
    for cond in conditions:
        if isinstance(cond, dict) and cond.get("name") == "density_uncertainty":
            detail = _field(cond, "detail")
            points = _field(detail, "points")
            margins = _field(detail, "margins")
            break
    else:
        raise SchemaError("conditions: no 'density_uncertainty' entry")
    if len(points) != len(margins) or not points:
        raise SchemaError("conditions.detail: points and margins disagree")
    if not all(isinstance(p, (int, float)) for p in points):
        raise SchemaError("conditions.detail.points: finite-group points "
                          "have no theta axis to plot")
    return {"points": np.asarray(points, dtype=float),
            "margins": np.asarray(margins, dtype=float),
            "verdict": payload.get("verdict", "unknown")}


def parse_periodogram_csv(path):
    """Wide periodogram CSV: theta column plus entry_ij_re/_im pairs."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read input ({exc})") from exc
    if not rows or not rows[0] or rows[0][0] != "theta" or (len(rows[0]) - 1) % 2:
        raise SchemaError("header: expected 'theta,entry_11_re,entry_11_im,...'")
    pairs = (len(rows[0]) - 1) // 2
    dim = int(round(math.sqrt(pairs)))
    if dim * dim != pairs:
        raise SchemaError("header: entry columns do not form a square matrix")
    thetas = []
    values = []
    for r, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            thetas.append(float(row[0]))
            flat = [complex(float(row[1 + 2 * t]), float(row[2 + 2 * t]))
                    for t in range(pairs)]
        except (ValueError, IndexError) as exc:
            raise SchemaError(f"row {r}: malformed numeric cell") from exc
        values.append(np.array(flat).reshape(dim, dim))
    if not thetas:
        raise SchemaError("rows: file has a header but no data")
    return {"thetas": np.asarray(thetas), "values": np.stack(values),
            "dim": dim}


def parse_photons(payload):
    payload = unwrap(payload)
    per_mode = _field(payload, "per_mode")
    if not isinstance(per_mode, list) or not per_mode:
        raise SchemaError("per_mode: expected a nonempty list")
    return {"per_mode": [float(x) for x in per_mode],
            "total": float(_field(payload, "total"))}

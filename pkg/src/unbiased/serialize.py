"""JSON/CSV serialization for matrices, weights, records, and reports.

Matrix literal format used everywhere:
    { "n": int, "re": [row-major reals], "im": [row-major reals] }
Weight matrices additionally carry the row count:
    { "k": int, "n": int, "re": [...], "im": [...] }
The string shorthand "uniform:n" is accepted wherever a weight matrix is
expected in configs.
"""

from __future__ import annotations

import io
import csv
import json

import numpy as np

from .linalg import SpectrumReport, as_matrix
from .potential import GaugeSlicePoint, WeightMatrix, uniform_weights
from .solver import CriticalPointRecord


def matrix_to_json(m) -> dict:
    a = as_matrix(m)
    return {
        "n": int(a.shape[0]),
        "re": [float(x) for x in a.real.ravel()],
        "im": [float(x) for x in a.imag.ravel()],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        n = int(obj["n"])
        re = np.asarray(obj["re"], dtype=float).reshape(n, n)
        im = np.asarray(obj["im"], dtype=float).reshape(n, n)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix object: {exc}") from exc
    return re + 1j * im


def weights_to_json(w: WeightMatrix) -> dict:
    return {
        "k": int(w.k),
        "n": int(w.n),
        "re": [float(x) for x in w.entries.real.ravel()],
        "im": [float(x) for x in w.entries.imag.ravel()],
    }


def weights_from_json(obj) -> WeightMatrix:
    try:
        k, n = int(obj["k"]), int(obj["n"])
        re = np.asarray(obj["re"], dtype=float).reshape(k, n)
        im = np.asarray(obj["im"], dtype=float).reshape(k, n)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed weight object: {exc}") from exc
    return WeightMatrix(k=k, n=n, entries=re + 1j * im)


def parse_weights_spec(spec, default_n: int | None = None) -> WeightMatrix:
    """Accept 'uniform:n', 'uniform' (with a default dimension), a JSON
    object, or a path to a JSON file."""
    if isinstance(spec, WeightMatrix):
        return spec
    if isinstance(spec, dict):
        return weights_from_json(spec)
    if isinstance(spec, str):
        if spec.startswith("uniform"):
            if ":" in spec:
                return uniform_weights(int(spec.split(":", 1)[1]))
            if default_n is None:
                raise ValueError("'uniform' shorthand needs a dimension")
            return uniform_weights(default_n)
        with open(spec, "r", encoding="utf-8") as fh:
            return weights_from_json(json.load(fh))
    raise ValueError(f"cannot interpret weight spec {spec!r}")


def _complex_to_json(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def record_to_json(record: CriticalPointRecord) -> dict:
    free = record.slice_point.free_entries
    return {
        "slice_point": {
            "n": record.slice_point.n,
            "re": [float(x) for x in free.real.ravel()],
            "im": [float(x) for x in free.imag.ravel()],
        },
        "residual_norm": float(record.residual_norm),
        "potential_power": _complex_to_json(record.potential_power),
        "hessian_spectrum": {
            "values": [float(v) for v in record.hessian_spectrum.values],
            "rank": record.hessian_spectrum.rank,
            "nullity": record.hessian_spectrum.nullity,
            "tolerance_used": record.hessian_spectrum.tolerance_used,
        },
        "nullity": record.nullity,
        "basin_count": record.basin_count,
        "canonical_key": list(record.canonical_key),
        "iterations": record.iterations,
    }


def record_from_json(obj) -> CriticalPointRecord:
    sp = obj["slice_point"]
    n = int(sp["n"])
    m = n - 1
    free = (np.asarray(sp["re"], dtype=float) + 1j * np.asarray(sp["im"], dtype=float)).reshape(m, m)
    spec = obj["hessian_spectrum"]
    return CriticalPointRecord(
        slice_point=GaugeSlicePoint(n=n, free_entries=free),
        residual_norm=float(obj["residual_norm"]),
        potential_power=complex(obj["potential_power"]["re"], obj["potential_power"]["im"]),
        hessian_spectrum=SpectrumReport(
            values=tuple(float(v) for v in spec["values"]),
            rank=int(spec["rank"]),
            nullity=int(spec["nullity"]),
            tolerance_used=float(spec["tolerance_used"]),
        ),
        nullity=int(obj["nullity"]),
        basin_count=int(obj["basin_count"]),
        canonical_key=tuple(obj["canonical_key"]),
        iterations=int(obj.get("iterations", 0)),
    )


def records_to_json(records) -> list:
    return [record_to_json(r) for r in records]


def records_from_json(payload) -> list:
    """Accept either a bare record array or a {"records": [...]} wrapper."""
    if isinstance(payload, dict):
        payload = payload.get("records", [])
    return [record_from_json(obj) for obj in payload]


def clusters_to_csv(records) -> str:
    """Cluster summary: one row per cluster with n, nullity, basin, |E^n|."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["cluster", "n", "nullity", "basin_count", "abs_potential_power", "residual_norm"])
    for idx, r in enumerate(records):
        writer.writerow([
            idx,
            r.slice_point.n,
            r.nullity,
            r.basin_count,
            repr(abs(r.potential_power)),
            repr(float(r.residual_norm)),
        ])
    return buf.getvalue()


def reflexivity_table_csv(cert) -> str:
    """The facet-by-vertex evaluation table of a reflexivity certificate.

    One row per facet functional: its representative position, minimum, and
    the evaluation at every vertex (empty when the certificate stored only
    value summaries).
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if cert.table is not None:
        width = len(cert.table[0]) if cert.table else 0
        writer.writerow(["facet_i", "facet_j", "min_value"]
                        + [f"vertex_{v}" for v in range(width)])
        for (pos, _), values in zip(cert.value_counts, cert.table):
            writer.writerow([pos[0], pos[1], min(values)] + list(values))
    else:
        writer.writerow(["facet_i", "facet_j", "min_value", "distinct_values"])
        for pos, values in cert.value_counts:
            writer.writerow([pos[0], pos[1], min(values),
                             " ".join(str(v) for v in values)])
    return buf.getvalue()


def dump_json(obj, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")

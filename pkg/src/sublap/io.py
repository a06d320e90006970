"""Field, trace, curve, and report persistence.

Formats are textual and self-describing: the first line is a tagged JSON
header carrying the mesh geometry, problem parameters, solve report, and
the provenance hash of the generating configuration; numbers are printed
with 17 significant digits so float64 values round-trip exactly.
"""
from __future__ import annotations

import dataclasses
import json

import numpy as np

from .extension import Field, Mesh, SolveReport, build_mesh
from .functionals import FunctionalCurve
from .params import Parameters

FIELD_MAGIC = "# sublap-field 1 "
TRACE_MAGIC = "# sublap-trace 1 "
CURVE_MAGIC = "# sublap-curve 1 "


def _fmt(v: float) -> str:
    return "%.17g" % v


def _json_line(magic: str, header: dict) -> str:
    return magic + json.dumps(header, sort_keys=True) + "\n"


def _params_dict(p: Parameters | None):
    if p is None:
        return None
    return {"s": p.s, "q": p.q, "lambda_plus": p.lambda_plus,
            "lambda_minus": p.lambda_minus, "n": p.n}


def _report_dict(rep: SolveReport | None):
    if rep is None:
        return None
    return dataclasses.asdict(rep)


def save_field(path: str, fld: Field, config_hash: str = "") -> None:
    m = fld.mesh
    header = {"L": m.L, "Y": m.Y, "nx": m.nx, "my": m.my, "gamma": m.gamma,
              "a": m.a, "parameters": _params_dict(fld.params),
              "report": _report_dict(fld.report), "config": config_hash}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_json_line(FIELD_MAGIC, header))
        for row in fld.values:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")


def load_field(path: str) -> Field:
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith(FIELD_MAGIC):
            raise ValueError(f"{path} is not a field file")
        header = json.loads(first[len(FIELD_MAGIC):])
        values = np.loadtxt(fh, ndmin=2)
    mesh = build_mesh(L=header["L"], Y=header["Y"], nx=header["nx"],
                      my=header["my"], gamma=header["gamma"], a=header["a"])
    p = header.get("parameters")
    params = Parameters(**p) if p else None
    r = header.get("report")
    report = SolveReport(**r) if r else None
    return Field(mesh, values, params=params, report=report)


def save_trace_csv(path: str, fld: Field, config_hash: str = "") -> None:
    header = {"config": config_hash, "a": fld.mesh.a,
              "parameters": _params_dict(fld.params)}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_json_line(TRACE_MAGIC, header))
        fh.write("x,u\n")
        for x, u in zip(fld.mesh.x, fld.values[0]):
            fh.write(f"{_fmt(x)},{_fmt(u)}\n")


def save_curve_csv(path: str, crv: FunctionalCurve, config_hash: str = "") -> None:
    names = crv.names
    header = {"config": config_hash, "x0": crv.x0, "columns": names}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_json_line(CURVE_MAGIC, header))
        fh.write(",".join(names) + "\n")
        for row in crv.rows():
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def save_json(path: str, payload: dict, config_hash: str = "") -> None:
    doc = dict(payload)
    doc["config"] = config_hash
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_sanitize(doc), fh, sort_keys=True, indent=2)
        fh.write("\n")


def _sanitize(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats to None."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj

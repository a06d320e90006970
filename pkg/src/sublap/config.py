"""Run configuration: strict schema, defaults, and provenance hashing.

A run is described by one YAML document with five optional blocks
(mesh, solver, data, analysis, io) around a required parameters block.
Unknown keys are rejected by name rather than ignored: silently dropped
settings are the classic way to publish a plot of the wrong run.  The
provenance hash is taken over the fully-defaulted canonical form, so two
files that resolve to the same run share a hash regardless of formatting.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields
from typing import Any

import numpy as np
import yaml

from .params import Parameters


class ConfigError(ValueError):
    """Schema violation in a run configuration."""


_NUMBER = (int, float)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _block(raw: dict, name: str, allowed: dict[str, Any]) -> dict:
    """Extract raw[name], rejecting unknown keys with their dotted path."""
    sub = raw.get(name, {})
    if sub is None:
        sub = {}
    _require(isinstance(sub, dict), f"block '{name}' must be a mapping")
    for key in sub:
        if key not in allowed:
            raise ConfigError(f"unknown key '{name}.{key}'")
    out = dict(allowed)
    out.update(sub)
    return out


def _number(val, path: str, positive: bool = False) -> float:
    _require(isinstance(val, _NUMBER) and not isinstance(val, bool),
             f"'{path}' must be a number, got {val!r}")
    v = float(val)
    _require(not positive or v > 0, f"'{path}' must be positive, got {v}")
    return v


def _integer(val, path: str, minimum: int | None = None) -> int:
    _require(isinstance(val, int) and not isinstance(val, bool),
             f"'{path}' must be an integer, got {val!r}")
    if minimum is not None:
        _require(val >= minimum, f"'{path}' must be >= {minimum}, got {val}")
    return val


@dataclass(frozen=True)
class MeshBlock:
    L: float = 1.0
    Y: float = 1.0
    nx: int = 128
    my: int = 128
    gamma: float | None = None


@dataclass(frozen=True)
class SolverBlock:
    omega: float = 0.7
    tol: float = 1e-10
    max_iter: int = 500
    eps: float | None = None
    cg_tol: float = 1e-12


@dataclass(frozen=True)
class DataBlock:
    """Dirichlet boundary data selector.

    kind 'linear' is coefficient*x; 'weighted-poly' the degree-d element of
    the weighted harmonic polynomial basis; 'homogeneous-arc' the analytic
    antisymmetric homogeneous solution restricted to the boundary;
    'random-odd' / 'random-positive' are seeded Fourier combinations, odd
    in x respectively bounded away from zero.
    """

    kind: str = "linear"
    coefficient: float = 1.0
    degree: int = 2
    seed: int = 0
    modes: int = 6
    amplitude: float = 1.0


@dataclass(frozen=True)
class AnalysisBlock:
    x0: float = 0.0
    radii: tuple[float, ...] = ()
    pairs: tuple[tuple[float, float], ...] | None = None
    window: tuple[float, float] | None = None
    order_tol: float = 0.1
    ntheta: int = 256
    derivative_dr: float = 0.01
    eigencurve: tuple[str, tuple[float, ...]] | None = None


@dataclass(frozen=True)
class IoBlock:
    outdir: str = "out"
    formats: tuple[str, ...] = ("csv", "json", "svg")


@dataclass(frozen=True)
class RunConfig:
    parameters: Parameters
    mesh: MeshBlock
    solver: SolverBlock
    data: DataBlock
    analysis: AnalysisBlock
    io: IoBlock
    sha256: str


_DEFAULT_RADII = {"start": 0.15, "stop": 0.75, "count": 13,
                  "spacing": "geometric"}


def _parse_radii(spec, path: str) -> tuple[float, ...]:
    if spec is None:
        spec = dict(_DEFAULT_RADII)
    if isinstance(spec, (list, tuple)):
        vals = tuple(_number(v, f"{path}[{i}]", positive=True)
                     for i, v in enumerate(spec))
        _require(len(vals) >= 1, f"'{path}' must not be empty")
        _require(all(b > a for a, b in zip(vals, vals[1:])),
                 f"'{path}' must be strictly increasing")
        return vals
    _require(isinstance(spec, dict), f"'{path}' must be a list or a mapping")
    allowed = dict(_DEFAULT_RADII)
    for key in spec:
        if key not in allowed:
            raise ConfigError(f"unknown key '{path}.{key}'")
    allowed.update(spec)
    start = _number(allowed["start"], f"{path}.start", positive=True)
    stop = _number(allowed["stop"], f"{path}.stop", positive=True)
    count = _integer(allowed["count"], f"{path}.count", minimum=2)
    spacing = allowed["spacing"]
    _require(spacing in ("linear", "geometric"),
             f"'{path}.spacing' must be 'linear' or 'geometric'")
    _require(stop > start, f"'{path}' needs stop > start")
    if spacing == "linear":
        return tuple(np.linspace(start, stop, count))
    return tuple(np.geomspace(start, stop, count))


def parse_config(raw: dict) -> RunConfig:
    _require(isinstance(raw, dict), "configuration root must be a mapping")
    known = {"parameters", "mesh", "solver", "data", "analysis", "io"}
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown key '{key}'")
    _require("parameters" in raw, "missing required block 'parameters'")

    par = _block(raw, "parameters",
                 {"s": None, "q": None, "lambda_plus": 1.0, "lambda_minus": 1.0})
    _require(par["s"] is not None, "missing required key 'parameters.s'")
    _require(par["q"] is not None, "missing required key 'parameters.q'")
    try:
        p = Parameters(s=_number(par["s"], "parameters.s"),
                       q=_number(par["q"], "parameters.q"),
                       lambda_plus=_number(par["lambda_plus"],
                                           "parameters.lambda_plus"),
                       lambda_minus=_number(par["lambda_minus"],
                                            "parameters.lambda_minus"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    mb = _block(raw, "mesh", {"L": 1.0, "Y": 1.0, "nx": 128, "my": 128,
                              "gamma": None})
    mesh = MeshBlock(L=_number(mb["L"], "mesh.L", positive=True),
                     Y=_number(mb["Y"], "mesh.Y", positive=True),
                     nx=_integer(mb["nx"], "mesh.nx", minimum=8),
                     my=_integer(mb["my"], "mesh.my", minimum=8),
                     gamma=None if mb["gamma"] is None
                     else _number(mb["gamma"], "mesh.gamma", positive=True))

    sb = _block(raw, "solver", {"omega": 0.7, "tol": 1e-10, "max_iter": 500,
                                "eps": None, "cg_tol": 1e-12})
    solver = SolverBlock(omega=_number(sb["omega"], "solver.omega", positive=True),
                         tol=_number(sb["tol"], "solver.tol", positive=True),
                         max_iter=_integer(sb["max_iter"], "solver.max_iter",
                                           minimum=1),
                         eps=None if sb["eps"] is None
                         else _number(sb["eps"], "solver.eps", positive=True),
                         cg_tol=_number(sb["cg_tol"], "solver.cg_tol",
                                        positive=True))

    db = _block(raw, "data", {"kind": "linear", "coefficient": 1.0,
                              "degree": 2, "seed": 0, "modes": 6,
                              "amplitude": 1.0})
    kinds = ("linear", "weighted-poly", "homogeneous-arc", "random-odd",
             "random-positive")
    _require(db["kind"] in kinds,
             f"'data.kind' must be one of {kinds}, got {db['kind']!r}")
    data = DataBlock(kind=db["kind"],
                     coefficient=_number(db["coefficient"], "data.coefficient"),
                     degree=_integer(db["degree"], "data.degree", minimum=0),
                     seed=_integer(db["seed"], "data.seed", minimum=0),
                     modes=_integer(db["modes"], "data.modes", minimum=1),
                     amplitude=_number(db["amplitude"], "data.amplitude"))

    ab = _block(raw, "analysis", {"x0": 0.0, "radii": None, "pairs": None,
                                  "window": None, "order_tol": 0.1,
                                  "ntheta": 256, "derivative_dr": 0.01,
                                  "eigencurve": None})
    pairs = None
    if ab["pairs"] is not None:
        _require(isinstance(ab["pairs"], (list, tuple)),
                 "'analysis.pairs' must be a list of [k, t] pairs")
        acc = []
        for i, kt in enumerate(ab["pairs"]):
            _require(isinstance(kt, (list, tuple)) and len(kt) == 2,
                     f"'analysis.pairs[{i}]' must be a [k, t] pair")
            acc.append((_number(kt[0], f"analysis.pairs[{i}][0]"),
                        _number(kt[1], f"analysis.pairs[{i}][1]")))
        pairs = tuple(acc)
    window = None
    if ab["window"] is not None:
        w = ab["window"]
        _require(isinstance(w, (list, tuple)) and len(w) == 2,
                 "'analysis.window' must be [r_min, r_max]")
        window = (_number(w[0], "analysis.window[0]", positive=True),
                  _number(w[1], "analysis.window[1]", positive=True))
        _require(window[0] < window[1], "'analysis.window' must increase")
    eig = None
    if ab["eigencurve"] is not None:
        e = ab["eigencurve"]
        _require(isinstance(e, dict), "'analysis.eigencurve' must be a mapping")
        for key in e:
            if key not in ("kind", "T"):
                raise ConfigError(f"unknown key 'analysis.eigencurve.{key}'")
        kind = e.get("kind", "mixed")
        _require(kind in ("mixed", "dirichlet"),
                 "'analysis.eigencurve.kind' must be 'mixed' or 'dirichlet'")
        ts = e.get("T")
        _require(isinstance(ts, (list, tuple)) and len(ts) >= 1,
                 "'analysis.eigencurve.T' must be a non-empty list")
        eig = (kind, tuple(_number(t, f"analysis.eigencurve.T[{i}]",
                                   positive=True) for i, t in enumerate(ts)))
    analysis = AnalysisBlock(
        x0=_number(ab["x0"], "analysis.x0"),
        radii=_parse_radii(ab["radii"], "analysis.radii"),
        pairs=pairs, window=window,
        order_tol=_number(ab["order_tol"], "analysis.order_tol", positive=True),
        ntheta=_integer(ab["ntheta"], "analysis.ntheta", minimum=16),
        derivative_dr=_number(ab["derivative_dr"], "analysis.derivative_dr",
                              positive=True),
        eigencurve=eig)

    ib = _block(raw, "io", {"outdir": "out", "formats": ["csv", "json", "svg"]})
    _require(isinstance(ib["outdir"], str) and ib["outdir"],
             "'io.outdir' must be a non-empty string")
    fmts = ib["formats"]
    _require(isinstance(fmts, (list, tuple)) and fmts,
             "'io.formats' must be a non-empty list")
    for f in fmts:
        _require(f in ("csv", "json", "svg"),
                 f"'io.formats' entries must be csv/json/svg, got {f!r}")
    io = IoBlock(outdir=ib["outdir"], formats=tuple(fmts))

    cfg = RunConfig(parameters=p, mesh=mesh, solver=solver, data=data,
                    analysis=analysis, io=io, sha256="")
    return RunConfig(parameters=p, mesh=mesh, solver=solver, data=data,
                     analysis=analysis, io=io, sha256=config_hash(cfg))


def _canonical(cfg: RunConfig) -> dict:
    def plain(obj):
        if isinstance(obj, tuple):
            return [plain(v) for v in obj]
        if hasattr(obj, "__dataclass_fields__"):
            return {f.name: plain(getattr(obj, f.name)) for f in fields(obj)}
        return obj

    return {name: plain(getattr(cfg, name))
            for name in ("parameters", "mesh", "solver", "data", "analysis",
                         "io")}


def config_hash(cfg: RunConfig) -> str:
    """sha256 over the fully-defaulted canonical JSON form."""
    blob = json.dumps(_canonical(cfg), sort_keys=True,
                      separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from exc
    if raw is None:
        raise ConfigError(f"config {path} is empty")
    return parse_config(raw)

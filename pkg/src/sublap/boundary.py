"""Dirichlet boundary-data factories for the solve pipeline.

Each factory turns a DataBlock into a smooth callable of (x, y) evaluated
on the outer boundary nodes.  The random kinds are fully determined by the
seed: 'random-odd' draws x-odd Fourier combinations (odd data forces an
odd solution, pinning a nodal point at x = 0), while 'random-positive'
normalizes the oscillation so the data stays bounded away from zero and
the solve is sign-definite.
"""
from __future__ import annotations

import numpy as np

from .angular import build_antisymmetric
from .config import DataBlock
from .homogeneous import extend, sB_basis
from .params import DerivedExponents, Parameters


def boundary_data(data: DataBlock, p: Parameters, d: DerivedExponents,
                  L: float):
    if data.kind == "linear":
        c = data.coefficient
        return lambda x, y: c * np.asarray(x, dtype=float)
    if data.kind == "weighted-poly":
        poly = sB_basis(d.a, data.degree)
        c = data.coefficient
        return lambda x, y: c * poly(x, y)
    if data.kind == "homogeneous-arc":
        u1 = extend(build_antisymmetric(p, d), d.k_q)
        return u1.eval
    if data.kind in ("random-odd", "random-positive"):
        rng = np.random.default_rng(data.seed)
        coef = rng.standard_normal(data.modes)
        m = np.arange(1, data.modes + 1, dtype=float)
        amp = data.amplitude
        if data.kind == "random-odd":
            def odd(x, y):
                x = np.asarray(x, dtype=float)[..., None]
                y = np.asarray(y, dtype=float)[..., None]
                waves = np.sin(m * np.pi * x / L) * np.exp(-m * y / L)
                return amp * np.sum(coef / m * waves, axis=-1)

            return odd
        norm = float(np.sum(np.abs(coef) / m))

        def positive(x, y):
            x = np.asarray(x, dtype=float)[..., None]
            y = np.asarray(y, dtype=float)[..., None]
            waves = np.cos(m * np.pi * x / L) * np.exp(-m * y / L)
            osc = np.sum(coef / m * waves, axis=-1) / norm
            return amp * (1.2 + osc)

        return positive
    raise ValueError(f"unknown data kind {data.kind!r}")

"""Deterministic SVG figures for fields, curves, profiles, and reports.

Plots are artifacts, so they must be reproducible byte-for-byte: the SVG
backend gets a fixed hash salt, embedded timestamps are suppressed, and
every figure carries the generating config hash in its metadata.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .extension import Field  # noqa: E402
from .functionals import FunctionalCurve  # noqa: E402

plt.rcParams["svg.hashsalt"] = "sublap"
plt.rcParams["svg.fonttype"] = "none"

_STRATUM_STYLE = {
    "Sublinear": ("o", "tab:red"),
    "Regular": ("s", "tab:green"),
    "Unclassified": ("x", "tab:gray"),
}


def _save(fig, path: str, config_hash: str) -> None:
    fig.savefig(path, format="svg",
                metadata={"Date": None,
                          "Description": f"config:{config_hash}"})
    plt.close(fig)


def plot_field(fld: Field, path: str, config_hash: str = "") -> None:
    """Color map of the extension field over the half-rectangle."""
    fig, ax = plt.subplots(figsize=(7, 3.2), constrained_layout=True)
    vmax = float(np.max(np.abs(fld.values))) or 1.0
    pc = ax.pcolormesh(fld.mesh.x, fld.mesh.y, fld.values, cmap="RdBu_r",
                       vmin=-vmax, vmax=vmax, shading="gouraud")
    fig.colorbar(pc, ax=ax, label="u")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("extension field")
    _save(fig, path, config_hash)


def plot_trace(fld: Field, path: str, config_hash: str = "",
               points=None) -> None:
    """Trace u(x, 0), optionally overlaid with classified nodal points."""
    fig, ax = plt.subplots(figsize=(7, 3.2), constrained_layout=True)
    ax.plot(fld.mesh.x, fld.values[0], lw=1.2, color="tab:blue")
    ax.axhline(0.0, color="0.7", lw=0.6)
    for pt in points or ():
        label = pt.stratum or pt.kind
        marker, color = _STRATUM_STYLE.get(
            label, ("d", "tab:orange") if label.startswith("Singular")
            else ("v", "tab:purple"))
        ax.plot([pt.x0], [0.0], marker=marker, color=color, ms=7,
                label=f"{label} @ {pt.x0:.3g}")
    if points:
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel("x")
    ax.set_ylabel("u(x, 0)")
    ax.set_title("trace")
    _save(fig, path, config_hash)


def plot_curve(crv: FunctionalCurve, path: str, config_hash: str = "") -> None:
    """Three-panel view: mass, frequency quotients, Weiss/Monneau columns."""
    fig, axes = plt.subplots(1, 3, figsize=(10.5, 3.2), constrained_layout=True)
    r = crv.radii

    ax = axes[0]
    h = crv.column("H")
    if np.all(h > 0):
        ax.loglog(r, h, "o-", ms=3, color="tab:blue")
    else:
        ax.semilogx(r, h, "o-", ms=3, color="tab:blue")
    ax.set_xlabel("r")
    ax.set_ylabel("H")
    ax.set_title("boundary mass")

    ax = axes[1]
    for name, color in (("N_q", "tab:red"), ("N_2", "tab:orange")):
        if name in crv.columns:
            ax.semilogx(r, crv.column(name), "o-", ms=3, color=color,
                        label=name)
    ax.set_xlabel("r")
    ax.set_title("frequency")
    ax.legend(fontsize=8)

    ax = axes[2]
    drawn = False
    for name in crv.names:
        if name.startswith("W_") or name == "M":
            ax.semilogx(r, crv.column(name), "o-", ms=3, label=name)
            drawn = True
    if not drawn:
        ax.semilogx(r, crv.column("E_q"), "o-", ms=3, label="E_q")
    ax.set_xlabel("r")
    ax.set_title("Weiss / Monneau")
    ax.legend(fontsize=8)
    _save(fig, path, config_hash)


def plot_profiles(profiles, path: str, config_hash: str = "") -> None:
    """Angular profiles phi and their fluxes w against theta."""
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.2), constrained_layout=True)
    for label, prof in profiles:
        axes[0].plot(prof.theta, prof.phi, lw=1.2, label=label)
        axes[1].plot(prof.theta, prof.w, lw=1.2, label=label)
    for ax, name in zip(axes, ("phi", "flux w = sin(theta)^a phi'")):
        ax.axhline(0.0, color="0.7", lw=0.6)
        ax.set_xlabel("theta")
        ax.set_title(name)
        ax.legend(fontsize=8)
    _save(fig, path, config_hash)


def plot_eigencurve(ts, k1s, path: str, config_hash: str = "",
                    marks=None) -> None:
    """First-eigenvalue exponent against the cap opening angle."""
    fig, ax = plt.subplots(figsize=(5, 3.4), constrained_layout=True)
    ax.plot(ts, k1s, "o-", ms=3, color="tab:blue")
    for label, x, y in marks or ():
        ax.plot([x], [y], "*", color="tab:red", ms=10)
        ax.annotate(label, (x, y), textcoords="offset points", xytext=(5, 5),
                    fontsize=8)
    ax.set_xlabel("T")
    ax.set_ylabel("k1(T)")
    ax.set_title("eigenvalue exponent")
    _save(fig, path, config_hash)

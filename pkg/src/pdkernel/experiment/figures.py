"""Figure rendering for the report paths (compare, dispersion).

matplotlib is imported lazily with the Agg backend so the numerical core
never needs a display; only the CLI report paths render files.
"""

from __future__ import annotations

import os
import tempfile

_LABELS = {
    "resolved_fem": "resolved FEM",
    "derived_kernel": "derived kernel",
    "standard_pd": "standard PD",
    "omega_bloch": "exact (transfer matrix)",
    "omega_derived_order2": "derived kernel, order 2",
    "omega_derived_order4": "derived kernel, order 4",
    "omega_standard_pd": "standard PD",
}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _atomic_savefig(fig, path):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".png")
    os.close(fd)
    try:
        fig.savefig(tmp, format="png", dpi=150)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_comparison_figure(t, columns, path, probe_position=None):
    """Midpoint-displacement comparison of the solver methods."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(8, 5))
    for name, values in columns.items():
        style = "-" if name == "resolved_fem" else "--"
        ax.plot(t * 1e3, values * 1e6, style, label=_LABELS.get(name, name))
    ax.set_xlabel("time [ms]")
    ax.set_ylabel("displacement [um]")
    title = "Probe displacement comparison"
    if probe_position is not None:
        title += f" at x = {probe_position:g} m"
    ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _atomic_savefig(fig, path)
    plt.close(fig)


def save_dispersion_figure(table, path):
    """Acoustic-branch dispersion curves against the exact oracle."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(8, 5))
    xi_l = table["xi_l"]
    for name in ("omega_bloch", "omega_derived_order2",
                 "omega_derived_order4", "omega_standard_pd"):
        style = "-" if name == "omega_bloch" else "--"
        ax.plot(xi_l, table[name] / (2.0 * 3.141592653589793) / 1e3, style,
                label=_LABELS.get(name, name))
    ax.set_xlabel("dimensionless wavenumber  xi * l")
    ax.set_ylabel("frequency [kHz]")
    ax.set_title("Acoustic branch dispersion")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _atomic_savefig(fig, path)
    plt.close(fig)


def save_kernel_figure(kernels, path):
    """Stem plot of the discrete influence-function coefficients."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 5))
    markers = ("o", "s", "^")
    for (label, kernel), marker in zip(kernels.items(), markers):
        ns, cs = kernel.full_range()
        ax.plot(ns, cs, marker, linestyle=":", label=label, fillstyle="none")
    ax.set_xlabel("cell offset n")
    ax.set_ylabel("c_n [1/m^2]")
    ax.set_title("Discrete influence function")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _atomic_savefig(fig, path)
    plt.close(fig)

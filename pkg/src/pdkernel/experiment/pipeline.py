"""Comparison pipeline: derive kernels, run the three solvers, tabulate
dispersion curves, and recover the stiff volume fraction from reference
coefficients."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize_scalar

from ..errors import ConfigError
from ..kernel import DiscreteKernel, fourier_coefficients, truncate
from ..microstructure import UnitCell
from ..solvers import (
    DerivedKernelSolver,
    FemSolver,
    StandardPdSolver,
    TimeSeries,
    run,
    standard_pd_symbol,
)
from .bloch import acoustic_branch_omega
from .config import ExperimentConfig
from .metrics import ComparisonReport, compare

METHODS = ("derived_kernel", "standard_pd", "resolved_fem")


def derive_kernel(config: ExperimentConfig,
                  order: int | None = None) -> DiscreteKernel:
    """Fourier coefficients for the configured cell, truncated per config."""
    kernel = fourier_coefficients(
        config.cell,
        order=order if order is not None else config.kernel_order,
        n_max=config.kernel_n_max,
        num_quad=config.kernel_num_quad,
    )
    if config.kernel_truncation_tol > 0.0:
        kernel = truncate(kernel, config.kernel_truncation_tol)
    return kernel


def make_solver(config: ExperimentConfig, method: str,
                kernel: DiscreteKernel | None = None):
    if method == "derived_kernel":
        if kernel is None:
            kernel = derive_kernel(config)
        return DerivedKernelSolver(config.bar, kernel, config.pulse,
                                   dt=config.dt)
    if method == "standard_pd":
        return StandardPdSolver(config.bar, config.standard_pd_config(),
                                config.pulse, dt=config.dt)
    if method == "resolved_fem":
        return FemSolver(config.bar, config.fem, config.pulse, dt=config.dt)
    raise ConfigError(f"unknown method {method!r}; expected one of {METHODS}")


def run_method(config: ExperimentConfig, method: str,
               kernel: DiscreteKernel | None = None) -> tuple[TimeSeries, float]:
    """Run one method to the configured window; returns (series, seconds)."""
    solver = make_solver(config, method, kernel=kernel)
    start = time.perf_counter()
    series = run(solver, config.effective_t_end(),
                 probes=config.effective_probes(),
                 stride=config.record_stride)
    return series, time.perf_counter() - start


@dataclass
class ComparisonResult:
    """Aligned midpoint series of all methods plus their error metrics."""

    report: ComparisonReport
    t: np.ndarray
    columns: dict[str, np.ndarray]
    series: dict[str, TimeSeries]


def run_comparison(config: ExperimentConfig) -> ComparisonResult:
    """Run FEM reference, derived kernel, and standard PD; align and score.

    The aligned table lives on the reference (FEM) time grid; other
    methods are resampled onto it by linear interpolation.
    """
    reference, ref_clock = run_method(config, "resolved_fem")
    report = ComparisonReport(reference="resolved_fem")
    series = {"resolved_fem": reference}
    columns = {"resolved_fem": reference.values[:, 0]}
    clocks = {"resolved_fem": ref_clock}
    for method in ("derived_kernel", "standard_pd"):
        s, clock = run_method(config, method)
        series[method] = s
        clocks[method] = clock
        columns[method] = np.interp(reference.t, s.t, s.values[:, 0])
        report.metrics[method] = compare(reference, s, wall_clock=clock)
    report.metrics["resolved_fem"] = compare(reference, reference,
                                             wall_clock=ref_clock)
    return ComparisonResult(report=report, t=reference.t.copy(),
                            columns=columns, series=series)


def dispersion_table(config: ExperimentConfig,
                     num_points: int = 50) -> dict[str, np.ndarray]:
    """Angular frequency vs wavenumber for the derived kernels (orders 2
    and 4), the standard-PD discrete symbol, and the exact Bloch branch,
    over xi*l in (0, 1/2]."""
    l = config.cell.cell_length
    xi_l = np.arange(1, num_points + 1) / num_points * 0.5
    xi = xi_l / l
    k2 = derive_kernel(config, order=2)
    k4 = derive_kernel(config, order=4)
    pd_config = config.standard_pd_config()
    factor = pd_config.e_ave / pd_config.rho_ave
    omega_pd = np.sqrt(np.maximum(-factor * standard_pd_symbol(pd_config, xi), 0.0))
    omega_bloch = np.array([acoustic_branch_omega(config.cell, x) for x in xi])
    return {
        "xi": xi,
        "xi_l": xi_l,
        "omega_bloch": omega_bloch,
        "omega_derived_order2": k2.dispersion_frequency(xi),
        "omega_derived_order4": k4.dispersion_frequency(xi),
        "omega_standard_pd": omega_pd,
    }


@dataclass(frozen=True)
class SweepResult:
    """Volume-fraction recovery against reference coefficients."""

    alpha: float
    residual: float
    coefficients: tuple[float, ...]
    rel_errors: tuple[float, ...]


def sweep_alpha(config: ExperimentConfig, targets,
                order: int = 2, num_coarse: int = 47) -> SweepResult:
    """Recover alpha by least squares on the leading kernel coefficients.

    Minimizes the sum of squared relative deviations of c_1..c_k from the
    targets over alpha in (0, 1/2): coarse grid scan, then a bounded
    scalar refinement around the best grid point.
    """
    targets = np.asarray(targets, dtype=float)
    if len(targets) < 1 or np.any(targets == 0.0):
        raise ConfigError("sweep targets must be nonzero coefficients c_1..c_k")
    cell = config.cell
    n_max = max(len(targets), 4)

    def coefficients(alpha: float) -> np.ndarray:
        trial = UnitCell.from_alpha(alpha, cell.cell_length, cell.e_stiff,
                                    cell.e_compliant, cell.rho_stiff,
                                    cell.rho_compliant)
        kernel = fourier_coefficients(trial, order=order, n_max=n_max,
                                      num_quad=config.kernel_num_quad)
        return kernel.coefficients[1:len(targets) + 1]

    def residual(alpha: float) -> float:
        c = coefficients(alpha)
        return float(np.sum(((c - targets) / targets) ** 2))

    grid = np.linspace(0.02, 0.48, num_coarse)
    residuals = [residual(a) for a in grid]
    best = int(np.argmin(residuals))
    step = grid[1] - grid[0]
    lo = max(1e-3, grid[best] - step)
    hi = min(0.5 - 1e-3, grid[best] + step)
    refined = minimize_scalar(residual, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10})
    alpha = float(refined.x)
    c = coefficients(alpha)
    rel = np.abs(c - targets) / np.abs(targets)
    return SweepResult(alpha=alpha, residual=float(refined.fun),
                       coefficients=tuple(float(v) for v in c),
                       rel_errors=tuple(float(v) for v in rel))

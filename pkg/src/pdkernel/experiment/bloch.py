"""Exact dispersion of the infinite periodic bar via transfer matrices.

Per layer, the harmonic state (u, sigma) propagates with an exact 2x2
matrix; the product over stiff/compliant/stiff layers gives the cell
matrix M(omega), and cos(2 pi xi l) = trace(M)/2 defines the dispersion
relation.  This is the independent oracle the derived kernels are checked
against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..errors import NumericalError
from ..microstructure import UnitCell, homogenized_density, homogenized_modulus


def layer_transfer_matrix(modulus: float, density: float, thickness: float,
                          omega: float) -> np.ndarray:
    """State propagator across one homogeneous layer at frequency omega.

    Uses sin(kh)/k via sinc so the omega -> 0 limit is the exact static
    matrix [[1, h/E], [0, 1]].
    """
    wave_speed = math.sqrt(modulus / density)
    k = omega / wave_speed
    kh = k * thickness
    sin_over_k = thickness * np.sinc(kh / np.pi)
    return np.array([
        [np.cos(kh), sin_over_k / modulus],
        [-modulus * k * np.sin(kh), np.cos(kh)],
    ])


def cell_transfer_matrix(cell: UnitCell, omega: float) -> np.ndarray:
    """Propagator across one unit cell: stiff, compliant, stiff."""
    l = cell.cell_length
    m_stiff = layer_transfer_matrix(cell.e_stiff, cell.rho_stiff,
                                    cell.alpha * l, omega)
    m_comp = layer_transfer_matrix(cell.e_compliant, cell.rho_compliant,
                                   cell.beta * l, omega)
    return m_stiff @ m_comp @ m_stiff


@dataclass(frozen=True)
class BlochResult:
    """Floquet multiplier information at one frequency.

    ``factor`` is the Bloch factor exp(i 2 pi xi l) inside a pass band and
    the decaying real multiplier in a gap, where ``evanescent`` is True.
    """

    half_trace: float
    factor: complex
    evanescent: bool


def bloch_dispersion_oracle(cell: UnitCell, omega: float) -> BlochResult:
    """Propagate (u, sigma) across one cell and return the Bloch factor."""
    if omega < 0.0:
        raise ValueError("omega must be nonnegative")
    m = cell_transfer_matrix(cell, omega)
    half_trace = 0.5 * float(m[0, 0] + m[1, 1])
    if abs(half_trace) <= 1.0:
        factor = complex(half_trace, math.sqrt(1.0 - half_trace**2))
        return BlochResult(half_trace=half_trace, factor=factor,
                           evanescent=False)
    # in a gap the multipliers are real reciprocals; report the decaying one
    root = math.sqrt(half_trace**2 - 1.0)
    candidates = (half_trace - root, half_trace + root)
    factor = min(candidates, key=abs)
    return BlochResult(half_trace=half_trace, factor=complex(factor),
                       evanescent=True)


def acoustic_branch_omega(cell: UnitCell, xi: float) -> float:
    """Invert the dispersion relation on the acoustic branch.

    Finds the smallest omega with trace(M(omega))/2 = cos(2 pi xi l) by
    bracketing from omega = 0 and bisecting (Brent).  xi is folded into
    the irreducible range xi*l in [0, 1/2].
    """
    l = cell.cell_length
    t = math.fmod(abs(xi) * l, 1.0)
    t = min(t, 1.0 - t)
    if t == 0.0:
        return 0.0
    target = math.cos(2.0 * math.pi * t)
    c_hom = math.sqrt(homogenized_modulus(cell) / homogenized_density(cell))

    def f(w):
        m = cell_transfer_matrix(cell, w)
        return 0.5 * (m[0, 0] + m[1, 1]) - target

    hi = 2.0 * math.pi * (t / l) * c_hom
    lo = 0.0
    for _ in range(200):
        if f(hi) < 0.0:
            break
        lo, hi = hi, hi * 1.25
    else:
        raise NumericalError(
            f"could not bracket the acoustic branch at xi = {xi}")
    return float(brentq(f, lo, hi, xtol=1e-12 * max(hi, 1.0), rtol=4e-15))

"""Periodic two-phase unit cell and bar geometry.

A unit cell is symmetric: a compliant band of length ``beta*l`` sits between
two stiff bands of length ``alpha*l`` each, so ``2*alpha + beta = 1``.
Material naming is role-based throughout (stiff = higher modulus,
compliant = lower modulus).
"""

from __future__ import annotations

from dataclasses import dataclass, field

_FRACTION_TOL = 1e-12


@dataclass(frozen=True)
class UnitCell:
    """Geometry and material parameters of one periodic cell.

    Parameters
    ----------
    alpha : float
        Volume-fraction parameter of each stiff band (dimensionless).
    beta : float
        Volume-fraction parameter of the compliant band (dimensionless).
    cell_length : float
        Cell period l in meters.
    e_stiff, e_compliant : float
        Elastic moduli in Pa, ``e_stiff >= e_compliant``.
    rho_stiff, rho_compliant : float
        Densities in kg/m^3.
    """

    alpha: float
    beta: float
    cell_length: float
    e_stiff: float
    e_compliant: float
    rho_stiff: float
    rho_compliant: float

    def __post_init__(self):
        if abs(2.0 * self.alpha + self.beta - 1.0) > _FRACTION_TOL:
            raise ValueError(
                f"volume fractions must satisfy 2*alpha + beta = 1, got "
                f"2*{self.alpha} + {self.beta} = {2 * self.alpha + self.beta}"
            )
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise ValueError("alpha and beta must be positive")
        if self.cell_length <= 0.0:
            raise ValueError("cell_length must be positive")
        for name in ("e_stiff", "e_compliant", "rho_stiff", "rho_compliant"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.e_stiff < self.e_compliant:
            raise ValueError("role naming requires e_stiff >= e_compliant")

    @classmethod
    def from_alpha(cls, alpha, cell_length, e_stiff, e_compliant,
                   rho_stiff, rho_compliant) -> "UnitCell":
        """Build a cell with ``beta`` computed from ``alpha``."""
        return cls(alpha, 1.0 - 2.0 * alpha, cell_length, e_stiff,
                   e_compliant, rho_stiff, rho_compliant)

    @property
    def interface_left(self) -> float:
        """Position of the stiff/compliant interface, y = alpha*l."""
        return self.alpha * self.cell_length

    @property
    def interface_right(self) -> float:
        """Position of the compliant/stiff interface, y = (alpha+beta)*l."""
        return (self.alpha + self.beta) * self.cell_length


@dataclass(frozen=True)
class Bar:
    """A bar of length L holding an integer number of unit cells."""

    length: float
    cell: UnitCell
    num_cells: int = field(init=False)

    def __post_init__(self):
        if self.length <= 0.0:
            raise ValueError("bar length must be positive")
        n = round(self.length / self.cell.cell_length)
        if n < 1 or abs(n * self.cell.cell_length - self.length) > 1e-9 * self.length:
            raise ValueError(
                f"bar length {self.length} is not an integer multiple of the "
                f"cell length {self.cell.cell_length}"
            )
        object.__setattr__(self, "num_cells", n)


def material_at(cell: UnitCell, y: float) -> tuple[float, float]:
    """Pointwise (modulus, density) at microscopic coordinate y in [0, l].

    The closed interval ``[alpha*l, (alpha+beta)*l]`` belongs to the
    compliant phase; both interface points are compliant.
    """
    if y < 0.0 or y > cell.cell_length:
        raise ValueError(f"y = {y} outside the unit cell [0, {cell.cell_length}]")
    if cell.interface_left <= y <= cell.interface_right:
        return cell.e_compliant, cell.rho_compliant
    return cell.e_stiff, cell.rho_stiff


def homogenized_modulus(cell: UnitCell) -> float:
    """Harmonic volume-fraction average 1 / (2a/E_stiff + b/E_compliant)."""
    return 1.0 / (2.0 * cell.alpha / cell.e_stiff + cell.beta / cell.e_compliant)


def homogenized_density(cell: UnitCell) -> float:
    """Arithmetic volume-fraction average 2a*rho_stiff + b*rho_compliant."""
    return 2.0 * cell.alpha * cell.rho_stiff + cell.beta * cell.rho_compliant

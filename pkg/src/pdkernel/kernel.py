"""Spectral transfer function and the discrete influence function.

The macroscopic (cell-averaged) displacement of the periodic two-phase bar
obeys a nonlocal equation of motion whose Fourier multiplier Omega(xi) is
periodic with period 1/l.  Its Fourier coefficients c_n form a discrete
influence function: one interaction coefficient per cell offset.  Omega is
obtained either from a closed form (order 2) or by solving the interface
continuity system assembled for a piecewise-polynomial cell ansatz
(orders 2, 4, 6).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.linalg.lapack import zgecon

from .errors import (
    ConfigError,
    DegenerateKernelError,
    DerivationError,
    QuadratureError,
    SingularSystemError,
)
from .microstructure import UnitCell, homogenized_density

SUPPORTED_ORDERS = (2, 4, 6)
DEFAULT_N_MAX = 12
DEFAULT_NUM_QUAD = 1024

# rcond below this is treated as rank deficiency of the continuity system
_SINGULAR_RCOND = 1e-13
# relative perturbation of xi*l used to step off a singular sample
_XI_NUDGE = 1e-9


# ---------------------------------------------------------------------------
# closed form (order 2)
# ---------------------------------------------------------------------------

def closed_form_coefficients(cell: UnitCell) -> tuple[float, float, float]:
    """Dimensionless denominator coefficients (a0, a1, a2) of the order-2
    closed form; a2 equals a0 identically."""
    a, b = cell.alpha, cell.beta
    e = cell.e_stiff / cell.e_compliant
    r = cell.rho_stiff / cell.rho_compliant
    a0 = 4 * e * a * b**2 + e * b**3 + 4 * a**3 * r + 6 * a**2 * b
    a1 = (48 * e * a**2 * b * r + 24 * e * a * b**2 * r + 16 * e * a * b**2
          + 10 * e * b**3 + 88 * a**3 * r + 48 * a**2 * b * r
          + 36 * a**2 * b + 24 * a * b**2)
    return a0, a1, a0


def omega_hat_closed_form(cell: UnitCell, xi):
    """Order-2 spectral transfer Omega(xi), in 1/m^2.

    Vectorized over ``xi`` (cycles/m); periodic with period 1/l.
    """
    a0, a1, a2 = closed_form_coefficients(cell)
    l = cell.cell_length
    z = np.exp(1j * 2.0 * np.pi * l * np.asarray(xi, dtype=float))
    denom = a0 + a1 * z + a2 * z * z
    if np.any(np.abs(denom) < 1e-14 * a1):
        raise SingularSystemError(
            "order-2 closed-form denominator vanished", xi=xi)
    return 12.0 * (z - 1.0) ** 2 / (l * l * denom)


def omega_hat_closed_form_real(cell: UnitCell, xi):
    """Order-2 Omega via the manifestly real cosine rewrite.

    Algebraically identical to :func:`omega_hat_closed_form`; useful as a
    structural check that Omega is real and nonpositive.
    """
    a0, a1, _ = closed_form_coefficients(cell)
    l = cell.cell_length
    ct = np.cos(2.0 * np.pi * l * np.asarray(xi, dtype=float))
    return 12.0 * (2.0 * ct - 2.0) / (l * l * (2.0 * a0 * ct + a1))


def homogenization_limit(cell: UnitCell, xi):
    """Vanishing-cell-size limit of Omega(xi), in 1/m^2.

    Equals -4 pi^2 xi^2 / ((b*Es/Ec + 2a) * (2a*rho_s/rho_c + b)), so that
    prefactor * limit reproduces the classical wave operator with the
    homogenized modulus and density.
    """
    a, b = cell.alpha, cell.beta
    e = cell.e_stiff / cell.e_compliant
    r = cell.rho_stiff / cell.rho_compliant
    xi = np.asarray(xi, dtype=float)
    return -4.0 * np.pi**2 * xi**2 / ((b * e + 2.0 * a) * (2.0 * a * r + b))


# ---------------------------------------------------------------------------
# generic order: interface continuity system
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolynomialCellAnsatz:
    """Piecewise-polynomial displacement ansatz inside one unit cell.

    The stiff bands carry degree ``order`` polynomials and the compliant
    band degree ``order + 1``; imposing interface continuity up to order
    ``order`` closes the system.
    """

    order: int

    def __post_init__(self):
        if self.order not in SUPPORTED_ORDERS:
            raise ConfigError(f"ansatz order must be one of {SUPPORTED_ORDERS}")

    @property
    def stiff_degree(self) -> int:
        return self.order

    @property
    def compliant_degree(self) -> int:
        return self.order + 1

    @property
    def coefficient_count(self) -> int:
        return 2 * (self.stiff_degree + 1) + (self.compliant_degree + 1)


def _interface_factor(k: int, e_ratio: float, er_ratio: float) -> float:
    """Stiff-side/compliant-side ratio of the k-th continuity condition.

    Time derivatives are eliminated through u_tt = (E/rho) u_yy within each
    homogeneous band, which turns the k-th order condition into continuity
    of (E/rho)^(k/2) u_y..y for even k and of E (E/rho)^((k-1)/2) u_y..y
    for odd k.
    """
    j = k // 2
    if k % 2 == 0:
        return er_ratio**j
    return e_ratio * er_ratio**j


def assemble_continuity_system(cell: UnitCell, ansatz: PolynomialCellAnsatz,
                               xi: float):
    """Linear system for the Fourier-transformed ansatz coefficients.

    The unknowns are nondimensionalized: segment polynomials are written in
    y/l, so the j-th unknown of a segment is (coefficient * l^j) and all
    matrix entries are O(1) combinations of alpha, beta, the material
    ratios, and the cross-cell phase.  The cell-average row is normalized
    by setting U(xi) = 1; cross-cell conditions carry the phase factor
    exp(i*2*pi*l*xi).  Rows are scaled to unit max modulus, which leaves
    the solution unchanged.

    Returns
    -------
    (matrix, rhs) : complex ndarray of shape (N, N) and (N,), with
        N = ansatz.coefficient_count.  Unknown ordering: stiff band at the
        cell start, compliant band, stiff band at the cell end, each by
        ascending polynomial degree in the local coordinate.
    """
    z = np.exp(1j * 2.0 * np.pi * cell.cell_length * float(xi))
    e_ratio = cell.e_stiff / cell.e_compliant
    er_ratio = (cell.e_stiff * cell.rho_compliant) / (cell.e_compliant * cell.rho_stiff)
    return _assemble(cell.alpha, cell.beta, e_ratio, er_ratio, ansatz.order, z)


def _assemble(alpha, beta, e_ratio, er_ratio, order, z):
    p = order
    n1, n2 = p + 1, p + 2
    n = 2 * n1 + n2
    i1, i2, i3 = 0, n1, n1 + n2
    mat = np.zeros((n, n), dtype=complex)
    rhs = np.zeros(n, dtype=complex)

    def deriv(j, k, x):
        # d^k/dy^k of y^j at y = x (nondimensional local coordinate)
        if j < k:
            return 0.0
        return math.factorial(j) // math.factorial(j - k) * x ** (j - k)

    # cell average over the three bands equals U = 1
    row = 0
    for j in range(n1):
        mat[row, i1 + j] += alpha ** (j + 1) / (j + 1)
        mat[row, i3 + j] += alpha ** (j + 1) / (j + 1)
    for j in range(n2):
        mat[row, i2 + j] += beta ** (j + 1) / (j + 1)
    rhs[row] = 1.0
    row += 1

    for k in range(p + 1):
        gk = _interface_factor(k, e_ratio, er_ratio)
        fk = math.factorial(k)
        # stiff -> compliant interface at y = alpha*l
        for j in range(n1):
            mat[row, i1 + j] += gk * deriv(j, k, alpha)
        mat[row, i2 + k] -= fk
        row += 1
        # compliant -> stiff interface at y = (alpha+beta)*l
        for j in range(n2):
            mat[row, i2 + j] += deriv(j, k, beta)
        mat[row, i3 + k] -= gk * fk
        row += 1
        # periodic cross-cell condition (both sides stiff, factors cancel)
        mat[row, i1 + k] += z * fk
        for j in range(n1):
            mat[row, i3 + j] -= deriv(j, k, alpha)
        row += 1

    scale = np.max(np.abs(mat), axis=1)
    mat /= scale[:, None]
    rhs /= scale
    return mat, rhs


def _solve_linear_coefficient(cell, order, xi):
    """Solve the continuity system at one xi; return the nondimensional
    linear coefficient of the first stiff band (l times the paper-level
    derivative coefficient)."""
    ansatz = PolynomialCellAnsatz(order)

    def attempt(x):
        mat, rhs = assemble_continuity_system(cell, ansatz, x)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LinAlgWarning)
            lu, piv = lu_factor(mat, check_finite=False)
            rcond, _ = zgecon(lu, np.linalg.norm(mat, 1))
        if rcond < _SINGULAR_RCOND:
            return None
        return lu_solve((lu, piv), rhs, check_finite=False)[1]

    sol = attempt(xi)
    if sol is None:
        nudged = xi + _XI_NUDGE / cell.cell_length
        warnings.warn(
            f"continuity system rank deficient at xi = {xi}; "
            f"re-solving at perturbed xi = {nudged}",
            stacklevel=2,
        )
        sol = attempt(nudged)
        if sol is None:
            raise SingularSystemError(
                f"continuity system singular at xi = {xi} even after "
                "perturbation", xi=xi)
    return sol


def omega_hat_generic(cell: UnitCell, order: int, xi: float) -> complex:
    """Spectral transfer Omega(xi) from the continuity-system solve.

    Solves for the cell-boundary displacement gradient of the stiff band
    (the linear ansatz coefficient) and maps it to the Fourier multiplier
    of the cell-averaged acceleration, scaled by rho_compliant/rho_ave.
    For order 2 this agrees with :func:`omega_hat_closed_form`.
    """
    l = cell.cell_length
    z = np.exp(1j * 2.0 * np.pi * l * float(xi))
    a_hat = _solve_linear_coefficient(cell, order, float(xi))
    rho_ave = homogenized_density(cell)
    return complex((cell.rho_compliant / rho_ave) * (z - 1.0) * a_hat / (l * l))


# ---------------------------------------------------------------------------
# sampled transfer function and Fourier coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralTransfer:
    """Omega(xi) sampled on a uniform grid covering one period [0, 1/l).

    ``source`` records the provenance: "closed-form" for the order-2
    formula, "continuity-system" for the generic solve.
    """

    cell: UnitCell
    order: int
    xi: np.ndarray
    omega: np.ndarray
    source: str

    def __post_init__(self):
        scale = float(np.max(np.abs(self.omega)))
        if scale == 0.0:
            raise DerivationError("spectral transfer is identically zero")
        if abs(self.omega[0]) > 1e-10 * scale:
            raise DerivationError(
                f"Omega(0) = {self.omega[0]} does not vanish")
        # Omega(1/l - xi) must be the conjugate of Omega(xi)
        mirrored = np.conjugate(self.omega[::-1])
        sym_err = float(np.max(np.abs(self.omega[1:] - mirrored[:-1])))
        if sym_err > 1e-8 * scale:
            raise DerivationError(
                f"conjugate-symmetry residual {sym_err:.3e} exceeds tolerance")
        pos = float(np.max(self.omega.real))
        if pos > 1e-10 * scale:
            warnings.warn(
                f"Omega has positive real parts up to {pos:.3e}; the "
                "nonpositivity of the transfer function is only verified "
                "empirically at this order", stacklevel=2)

    @property
    def num_samples(self) -> int:
        return len(self.xi)


def sample_spectral_transfer(cell: UnitCell, order: int,
                             num_quad: int) -> SpectralTransfer:
    """Sample Omega on the uniform quadrature grid xi_j = j/(l*num_quad)."""
    if order not in SUPPORTED_ORDERS:
        raise ConfigError(f"order must be one of {SUPPORTED_ORDERS}")
    l = cell.cell_length
    xis = np.arange(num_quad) / (l * num_quad)
    if order == 2:
        om = np.asarray(omega_hat_closed_form(cell, xis), dtype=complex)
        source = "closed-form"
    else:
        om = np.empty(num_quad, dtype=complex)
        for j, x in enumerate(xis):
            om[j] = omega_hat_generic(cell, order, x)
        source = "continuity-system"
    return SpectralTransfer(cell=cell, order=order, xi=xis, omega=om,
                            source=source)


@dataclass(frozen=True)
class DiscreteKernel:
    """Truncated discrete influence function c_n, n = -m..m.

    Only n >= 0 is stored; mirroring makes the even symmetry c_n = c_{-n}
    exact by construction.  ``prefactor`` (e_stiff / rho_compliant, m^2/s^2)
    multiplies the kernel in the equation of motion.  ``imag_residual`` and
    ``quadrature_delta`` are derivation diagnostics relative to the largest
    coefficient.
    """

    cell_length: float
    order: int
    prefactor: float
    coefficients: np.ndarray  # c_0..c_m
    truncation_tol: float = 0.0
    imag_residual: float = field(default=0.0, compare=False)
    quadrature_delta: float = field(default=0.0, compare=False)

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        object.__setattr__(self, "coefficients", c)
        if len(c) < 2:
            raise DegenerateKernelError("kernel needs at least c_0 and c_1")
        total = c[0] + 2.0 * float(np.sum(c[1:]))
        if abs(total) > max(self.truncation_tol, 1e-12 * float(np.max(np.abs(c)))):
            raise DerivationError(f"kernel coefficients sum to {total}, not 0")

    @property
    def n_terms(self) -> int:
        """Largest retained offset m; the horizon is m cells."""
        return len(self.coefficients) - 1

    def coefficient(self, n: int) -> float:
        return float(self.coefficients[abs(n)])

    def full_range(self) -> tuple[np.ndarray, np.ndarray]:
        """(n, c_n) over the full symmetric range n = -m..m."""
        m = self.n_terms
        ns = np.arange(-m, m + 1)
        return ns, self.coefficients[np.abs(ns)]

    def symbol(self, xi):
        """Fourier multiplier of the truncated kernel,
        c_0 + 2 sum c_n cos(2 pi n l xi).  Approximates Omega(xi)."""
        xi = np.asarray(xi, dtype=float)
        ns = np.arange(1, self.n_terms + 1)
        ang = 2.0 * np.pi * self.cell_length * np.multiply.outer(xi, ns)
        return self.coefficients[0] + 2.0 * np.cos(ang) @ self.coefficients[1:]

    def dispersion_frequency(self, xi):
        """Plane-wave angular frequency sqrt(-prefactor * symbol(xi))."""
        return np.sqrt(np.maximum(-self.prefactor * self.symbol(xi), 0.0))

    def decay_ratio(self) -> float:
        """Geometric ratio fitted to log|c_n| over the significant range."""
        c = np.abs(self.coefficients[1:])
        mask = c > 1e-12 * float(np.max(c))
        ns = np.arange(1, len(c) + 1)[mask]
        if len(ns) < 2:
            return 0.0
        slope = np.polyfit(ns, np.log(c[mask]), 1)[0]
        return float(np.exp(slope))


def _raw_coefficients(transfer: SpectralTransfer, n_max: int) -> np.ndarray:
    """Periodic-grid quadrature of c_n = l * integral Omega e^{-i2pi n l xi};
    on the uniform grid this is the DFT of the samples divided by their
    count, which is spectrally accurate for smooth periodic Omega."""
    return np.fft.fft(transfer.omega)[: n_max + 1] / transfer.num_samples


def fourier_coefficients(cell: UnitCell, order: int = 2,
                         n_max: int = DEFAULT_N_MAX,
                         num_quad: int = DEFAULT_NUM_QUAD) -> DiscreteKernel:
    """Derive the discrete influence function for a unit cell.

    Samples Omega over one period, computes c_n for n = 0..n_max, verifies
    that residual imaginary parts and the change under doubling num_quad
    both stay below 1e-8 of the largest coefficient, discards the imaginary
    parts, mirrors to n < 0, and shifts c_0 so the coefficients sum to zero
    exactly (rigid fields then produce exactly zero acceleration).
    """
    if n_max < 1:
        raise ConfigError("n_max must be at least 1")
    if num_quad < 8 * n_max:
        raise ConfigError(
            f"num_quad = {num_quad} too small to resolve n_max = {n_max}; "
            "need num_quad >= 8 * n_max")

    c = _raw_coefficients(sample_spectral_transfer(cell, order, num_quad), n_max)
    c2 = _raw_coefficients(sample_spectral_transfer(cell, order, 2 * num_quad), n_max)
    scale = float(np.max(np.abs(c2)))

    imag_residual = float(np.max(np.abs(c.imag))) / scale
    if imag_residual > 1e-8:
        raise DerivationError(
            f"imaginary residual {imag_residual:.3e} of c_n exceeds 1e-8; "
            "transfer-function derivation is inconsistent")
    delta = float(np.max(np.abs(c - c2))) / scale
    if delta > 1e-8:
        raise QuadratureError(
            f"c_n changed by {delta:.3e} (relative to the largest "
            f"coefficient) when doubling num_quad = {num_quad}")

    coeffs = c.real.copy()
    coeffs[0] = -2.0 * float(np.sum(coeffs[1:]))
    return DiscreteKernel(
        cell_length=cell.cell_length,
        order=order,
        prefactor=cell.e_stiff / cell.rho_compliant,
        coefficients=coeffs,
        truncation_tol=0.0,
        imag_residual=imag_residual,
        quadrature_delta=delta,
    )


def truncate(kernel: DiscreteKernel, tol: float) -> DiscreteKernel:
    """Truncate to the smallest symmetric range whose discarded |c_n| are
    all below ``tol``; c_0 is re-shifted to keep the zero-sum exact."""
    if tol < 0.0:
        raise ConfigError("truncation tolerance must be nonnegative")
    if tol == 0.0:
        return kernel
    c = kernel.coefficients
    significant = np.nonzero(np.abs(c[1:]) >= tol)[0]
    if len(significant) == 0:
        raise DegenerateKernelError(
            f"tolerance {tol} exceeds |c_1| = {abs(c[1])}; nothing retained")
    m = int(significant[-1]) + 1
    coeffs = c[: m + 1].copy()
    coeffs[0] = -2.0 * float(np.sum(coeffs[1:]))
    return replace(kernel, coefficients=coeffs, truncation_tol=tol)


# ---------------------------------------------------------------------------
# kernel file format: the derive -> simulate contract
# ---------------------------------------------------------------------------

def write_kernel_file(kernel: DiscreteKernel, path) -> None:
    """Plain-text kernel file: three header lines, then one ``n c_n`` pair
    per line over the full symmetric range, 17 significant digits."""
    lines = [
        f"cell_length = {kernel.cell_length:.17g}",
        f"order = {kernel.order}",
        f"prefactor = {kernel.prefactor:.17g}",
    ]
    ns, cs = kernel.full_range()
    for n, cn in zip(ns, cs):
        lines.append(f"{n} {cn:.17g}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_kernel_file(path) -> DiscreteKernel:
    with open(path, "r", encoding="ascii") as fh:
        raw = [ln.strip() for ln in fh if ln.strip()]
    header = {}
    pairs = []
    for ln in raw:
        if "=" in ln:
            key, _, value = ln.partition("=")
            header[key.strip()] = value.strip()
        else:
            n_str, c_str = ln.split()
            pairs.append((int(n_str), float(c_str)))
    try:
        cell_length = float(header["cell_length"])
        order = int(header["order"])
        prefactor = float(header["prefactor"])
    except KeyError as exc:
        raise ConfigError(f"kernel file {path} missing header line {exc}") from exc
    by_n = dict(pairs)
    m = max(abs(n) for n in by_n)
    coeffs = np.empty(m + 1)
    for n in range(m + 1):
        if n not in by_n or -n not in by_n:
            raise ConfigError(f"kernel file {path} missing coefficient n = {n}")
        if by_n[n] != by_n[-n]:
            raise ConfigError(f"kernel file {path} breaks c_n = c_-n at n = {n}")
        coeffs[n] = by_n[n]
    return DiscreteKernel(cell_length=cell_length, order=order,
                          prefactor=prefactor, coefficients=coeffs)

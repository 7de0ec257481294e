"""Dense complex linear algebra and scalar helpers shared by the physics modules.

Matrices are plain ``numpy.ndarray`` objects.  Hermitian inputs go through
eigendecomposition; general (non-normal) generators such as Liouvillians go
through ``scipy.linalg.expm``.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from sympy import Rational
from sympy.physics.wigner import clebsch_gordan as _sympy_clebsch_gordan

from circgate.exceptions import ContractViolationError, DomainError, NotPositiveSemidefiniteError

logger = logging.getLogger(__name__)

HERMITIAN_RTOL = 1e-12
PSD_TOLERANCE = 1e-12


@dataclass(frozen=True)
class LogFactor:
    """A real number stored as sign and natural log of its magnitude."""

    sign: int
    log_magnitude: float

    @classmethod
    def from_value(cls, value):
        if value == 0:
            raise DomainError("Zero has no logarithmic representation")
        return cls(1 if value > 0 else -1, math.log(abs(value)))

    @classmethod
    def power(cls, base, exponent):
        if base <= 0:
            raise DomainError(f"Base must be positive, got {base}")
        return cls(1, exponent * math.log(base))

    def __mul__(self, other):
        return LogFactor(self.sign * other.sign, self.log_magnitude + other.log_magnitude)

    def __truediv__(self, other):
        return LogFactor(self.sign * other.sign, self.log_magnitude - other.log_magnitude)

    @property
    def value(self):
        return self.sign * math.exp(self.log_magnitude)


def log_product(factors, leading_sign=1):
    """Evaluate ``leading_sign * prod(base ** exponent)`` through a sum of logarithms.

    ``factors`` is an iterable of ``(base, exponent)`` pairs with positive bases.
    """
    if leading_sign not in (1, -1):
        raise DomainError(f"leading_sign must be +1 or -1, got {leading_sign}")
    terms = []
    for base, exponent in factors:
        if base <= 0:
            raise DomainError(f"log_product needs positive bases, got {base}")
        if exponent:
            terms.append(exponent * math.log(base))
    return leading_sign * math.exp(math.fsum(terms))


def _check_square(M):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ContractViolationError(f"Expected a square matrix, got shape {M.shape}")
    return M


def is_hermitian(M, rtol=HERMITIAN_RTOL):
    M = _check_square(M)
    scale = np.max(np.abs(M)) if M.size else 0.0
    return bool(np.max(np.abs(M - M.conj().T), initial=0.0) <= rtol * scale)


def hermitian_eig(M):
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a Hermitian matrix."""
    M = _check_square(M)
    if not is_hermitian(M):
        raise ContractViolationError("hermitian_eig requires a Hermitian matrix")
    eigenvalues, eigenvectors = np.linalg.eigh(M)
    return eigenvalues, eigenvectors


def hermitian_function(M, func):
    """Apply a scalar function to a Hermitian matrix through its spectrum."""
    eigenvalues, eigenvectors = hermitian_eig(M)
    return (eigenvectors * func(eigenvalues)) @ eigenvectors.conj().T


def psd_sqrt(M, tolerance=PSD_TOLERANCE):
    eigenvalues, eigenvectors = hermitian_eig(M)
    scale = max(1.0, float(np.max(np.abs(eigenvalues), initial=0.0)))
    lowest = float(eigenvalues[0]) if eigenvalues.size else 0.0
    if lowest < -tolerance * scale:
        raise NotPositiveSemidefiniteError(lowest, tolerance * scale)
    # eigenvalues within the tolerance band are zero, not sqrt(round-off)
    roots = np.sqrt(np.where(eigenvalues > tolerance * scale, eigenvalues, 0.0))
    return (eigenvectors * roots) @ eigenvectors.conj().T


def project_psd(M):
    """Nearest positive semidefinite matrix in Frobenius norm (eigenvalue clipping)."""
    M = _check_square(M)
    H = 0.5 * (M + M.conj().T)
    eigenvalues, eigenvectors = np.linalg.eigh(H)
    return (eigenvectors * np.clip(eigenvalues, 0.0, None)) @ eigenvectors.conj().T


def kron(*matrices):
    result = np.ones((1, 1), dtype=complex)
    for matrix in matrices:
        result = np.kron(result, np.asarray(matrix))
    return result


def matrix_exp(M):
    M = _check_square(M)
    if is_hermitian(M):
        return hermitian_function(M, np.exp)
    anti = -1j * M
    if is_hermitian(anti):
        return hermitian_function(anti, lambda x: np.exp(1j * x))
    return expm(M)


def rk4_integrate(generator, y0, t_span, steps):
    """Classical fixed-step RK4 for dy/dt = G(t) y.

    ``generator`` is either a constant matrix or a callable returning the
    matrix at time t.
    """
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")
    G = generator if callable(generator) else (lambda _t, _G=np.asarray(generator): _G)
    t0, t1 = t_span
    h = (t1 - t0) / steps
    y = np.array(y0, dtype=complex)
    t = t0
    for _ in range(steps):
        k1 = G(t) @ y
        k2 = G(t + h / 2) @ (y + h / 2 * k1)
        k3 = G(t + h / 2) @ (y + h / 2 * k2)
        k4 = G(t + h) @ (y + h * k3)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + h * (_ + 1)
    return y


def _half_integer(value, name):
    twice = Fraction(value).limit_denominator(4) * 2
    if twice.denominator != 1 or abs(float(twice) - 2 * value) > 1e-9:
        raise DomainError(f"{name}={value} is not a half-integer")
    return Rational(int(twice), 2)


@lru_cache(maxsize=4096)
def _clebsch_gordan_cached(j1, m1, j2, m2, J, M):
    return float(_sympy_clebsch_gordan(j1, j2, J, m1, m2, M))


def clebsch_gordan(j1, m1, j2, m2, J, M):
    """Condon-Shortley coefficient <j1 m1; j2 m2 | J M>.

    Returns 0 for any selection-rule violation (triangle, projection sum,
    |m| > j); raises DomainError for non half-integer arguments.
    """
    names = ("j1", "m1", "j2", "m2", "J", "M")
    j1, m1, j2, m2, J, M = (_half_integer(v, k) for v, k in zip((j1, m1, j2, m2, J, M), names))
    if min(j1, j2, J) < 0:
        raise DomainError("Angular momenta must be non-negative")
    for j, m in ((j1, m1), (j2, m2), (J, M)):
        if abs(m) > j or not (j - m).is_integer:
            return 0.0
    if m1 + m2 != M or not (j1 + j2 + J).is_integer:
        return 0.0
    if not abs(j1 - j2) <= J <= j1 + j2:
        return 0.0
    return _clebsch_gordan_cached(j1, m1, j2, m2, J, M)

"""Hydrogenic structure of circular Rydberg states.

Everything is SI internally.  Angular frequencies are rad/s; functions with
an ``_hz`` suffix return cyclic frequencies.  Closed forms whose factors grow
like ``n**n`` go through :func:`circgate.numerics.log_product`.
"""
import logging
import math
from dataclasses import dataclass
from typing import List

from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import gammaincc, gammainccinv

from circgate.exceptions import ChainConstructionError, DomainError
from circgate.numerics import log_product

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA-2018 values."""

    E_H: float = 4.3597447222071e-18
    a0: float = 5.29177210903e-11
    e: float = 1.602176634e-19
    epsilon0: float = 8.8541878128e-12
    h: float = 6.62607015e-34
    c: float = 299792458.0
    k_B: float = 1.380649e-23

    @property
    def E_R(self):
        return self.E_H / 2

    @property
    def hbar(self):
        return self.h / (2 * math.pi)


CONSTANTS = PhysicalConstants()


class RydbergLevel(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="Principal quantum number")
    l: int = Field(..., ge=0, description="Orbital quantum number")
    m: int = Field(..., description="Magnetic quantum number")

    @model_validator(mode="after")
    def _check_quantum_numbers(self):
        if self.l > self.n - 1:
            raise ValueError(f"l={self.l} exceeds n-1={self.n - 1}")
        if abs(self.m) > self.l:
            raise ValueError(f"|m|={abs(self.m)} exceeds l={self.l}")
        return self

    @classmethod
    def circular(cls, n):
        return cls(n=n, l=n - 1, m=n - 1)

    @property
    def is_circular(self):
        return self.l == self.n - 1 and abs(self.m) == self.l

    def energy(self, constants=CONSTANTS):
        return -constants.E_R / self.n ** 2

    def label(self):
        return f"|{self.n},{self.l},{self.m}>"


class DefectPair(BaseModel):
    delta: float = Field(..., description="Defect of |c_n c_n> -> |c_n+1 c_n-1> (rad/s)")
    delta_prime: float = Field(..., description="Defect of |c_n c_n> -> |c_n+2 c_n-1> channel (rad/s)")


def _require_n(n, minimum):
    if int(n) != n or n < minimum:
        raise DomainError(f"n must be an integer >= {minimum}, got {n}")


def reduced_dipole_down(n):
    """<c_{n-1}||r||c_n> in units of a0."""
    _require_n(n, 2)
    return log_product(
        [
            (4, n),
            (n, n + 1),
            (n - 1, n + 1.5),
            (4 * n * n - 6 * n + 2, 0.5),
            (2 * n - 1, -(2 * n + 1)),
        ],
        leading_sign=-1,
    )


def reduced_dipole_up(n):
    """<c_{n+1}||r||c_n> in units of a0."""
    _require_n(n, 1)
    return log_product(
        [
            (2, 0.5),
            (4, n + 1),
            (n + 1, n + 2),
            (n, n + 3),
            (2 * n + 1, -(2 * n + 2.5)),
        ]
    )


def reduced_dipole_near_circular(n):
    """<n, n-2||r||c_n> in units of a0 (same-n step down in l)."""
    _require_n(n, 2)
    return 1.5 * n * math.sqrt(2 * n - 1) * math.sqrt(n - 1)


def transition_frequency(n, constants=CONSTANTS):
    """Angular frequency of c_n -> c_{n-1}."""
    _require_n(n, 2)
    # 1/(n-1)^2 - 1/n^2 without cancellation
    return constants.E_R / constants.hbar * (2 * n - 1) / (n * n * (n - 1) ** 2)


def transition_frequency_hz(n, constants=CONSTANTS):
    return transition_frequency(n, constants) / (2 * math.pi)


def level_frequency_hz(lower, upper, constants=CONSTANTS):
    """Cyclic frequency between two hydrogenic levels, E_n = -E_R/n^2."""
    return abs(upper.energy(constants) - lower.energy(constants)) / constants.h


def energy_defects(n, constants=CONSTANTS):
    _require_n(n, 2)
    to_rad = 1.0 / constants.hbar
    # (E_H/2)(2/n^2 - 1/(n+1)^2 - 1/(n-1)^2) reduces to E_H (1 - 3n^2) / (n^2 (n^2-1)^2)
    delta = constants.E_H * (1 - 3 * n * n) / (n * n * (n * n - 1) ** 2)
    delta_prime = 0.5 * constants.E_H * math.fsum([-1 / (n + 2) ** 2, -1 / (n - 1) ** 2, 2 / n ** 2])
    return DefectPair(delta=delta * to_rad, delta_prime=delta_prime * to_rad)


def lifetime_prefactor(constants=CONSTANTS):
    return (
        3 * math.pi * constants.epsilon0 * constants.hbar ** 4 * constants.c ** 3
        / (constants.E_R ** 3 * constants.a0 ** 2 * constants.e ** 2)
    )


def lifetime_0K(n, constants=CONSTANTS):
    """Radiative lifetime of c_n at zero temperature (s)."""
    _require_n(n, 2)
    factors = [
        (2 * n - 1, 4 * n - 1),
        (2, -(4 * n + 1)),
        (n, -(2 * n - 4)),
        (n - 1, -(2 * n - 2)),
    ]
    return lifetime_prefactor(constants) * log_product(factors)


def lifetime_0K_from_dipole(n, constants=CONSTANTS):
    """Same lifetime, evaluated as a spontaneous-emission rate from the dipole element.

    Only the sigma component survives for circular states, so
    |<c_{n-1}|r|c_n>|^2 = <c_{n-1}||r||c_n>^2 / (2n-1).
    """
    _require_n(n, 2)
    omega = transition_frequency(n, constants)
    dipole_sq = reduced_dipole_down(n) ** 2 / (2 * n - 1) * constants.a0 ** 2
    rate = omega ** 3 * constants.e ** 2 * dipole_sq / (
        3 * math.pi * constants.epsilon0 * constants.hbar * constants.c ** 3
    )
    return 1.0 / rate


def thermal_occupation(n, temperature, constants=CONSTANTS):
    if temperature < 0:
        raise DomainError(f"Temperature must be >= 0 K, got {temperature}")
    if temperature == 0:
        return 0.0
    x = constants.hbar * transition_frequency(n, constants) / (constants.k_B * temperature)
    return 1.0 / math.expm1(x)


def lifetime(n, temperature, constants=CONSTANTS):
    """Lifetime including blackbody-stimulated emission on c_n -> c_{n-1} (s)."""
    occupation = thermal_occupation(n, temperature, constants)
    tau0 = lifetime_0K(n, constants)
    if occupation == 0.0:
        return tau0
    return tau0 / (occupation + 1.0)


def radial_probability_outside(n, radius, constants=CONSTANTS):
    """P(r > radius) for c_n, whose radial density is proportional to r^{2n} e^{-2r/(n a0)}."""
    _require_n(n, 1)
    if radius < 0:
        raise DomainError(f"radius must be >= 0, got {radius}")
    return float(gammaincc(2 * n + 1, 2 * radius / (n * constants.a0)))


def radial_peak_radius(n, constants=CONSTANTS):
    _require_n(n, 1)
    return n * n * constants.a0


def exclusion_radius(n, threshold=1e-12, constants=CONSTANTS):
    """Separation at which each electron lies beyond the midpoint with probability ``threshold``."""
    _require_n(n, 1)
    if not 0 < threshold < 1:
        raise DomainError(f"threshold must lie in (0, 1), got {threshold}")
    x = float(gammainccinv(2 * n + 1, threshold))
    return x * n * constants.a0


class StirapChain(BaseModel):
    first_index: int = Field(..., description="Ladder index of the first listed state")
    levels: List[RydbergLevel]
    link_frequencies_hz: List[float]

    def rows(self):
        for offset, level in enumerate(self.levels):
            link = self.link_frequencies_hz[offset] if offset < len(self.link_frequencies_hz) else None
            yield self.first_index + offset, level, link


def stirap_chain(n_final=112, upper_offset=170, constants=CONSTANTS):
    """Alternating two-chain ladder ending on the circular state c_{n_final}.

    Odd members are |upper_offset-k, 2k-2, 2k-2>, even members are
    |n_final/2 + k, 2k-1, 2k-1>, for k = 2 .. n_final/2.
    """
    if int(n_final) != n_final or n_final < 4 or n_final % 2:
        raise ChainConstructionError(f"n_final must be an even integer >= 4, got {n_final}")
    k_max = n_final // 2
    levels = []
    for k in range(2, k_max + 1):
        odd_n, odd_l = upper_offset - k, 2 * k - 2
        even_n, even_l = k_max + k, 2 * k - 1
        for n, l in ((odd_n, odd_l), (even_n, even_l)):
            if n <= l:
                raise ChainConstructionError(f"Ladder state n={n}, l={l} violates l <= n-1")
            levels.append(RydbergLevel(n=n, l=l, m=l))
    frequencies = [level_frequency_hz(a, b, constants) for a, b in zip(levels, levels[1:])]
    logger.debug(f"STIRAP chain to n={n_final}: {len(levels)} states, links {frequencies[0]:.4e}..{frequencies[-1]:.4e} Hz")
    return StirapChain(first_index=3, levels=levels, link_frequencies_hz=frequencies)

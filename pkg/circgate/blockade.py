"""Dipole-dipole coupling of two circular-state atoms and the resulting blockade shift.

Parallel geometry: quantization axis along the interatomic axis.  The pair
state |c_n c_n> couples to |c_{n+1} c_{n-1}>, detuned by the Forster defect
delta < 0, and the blockade shift is the upper eigenvalue of the 2x2 problem.

Perpendicular geometry: |c_n c_n> couples resonantly to |n,n-2,n-2>^2, so
B = V_dd.

The large-n limit of the parallel closed form is V_dd -> (e^2 a0^2 / 4 pi eps0 R^3) n^4 / 2.
An asymptote of 8 n^4 is sometimes quoted for this coupling; it is off by a
factor 16 from the exact closed form.  The exact form is the one consistent
with B/2pi = 2.21, 5.89, 8.71 GHz for n = 80, 100, 110 at R = 2 um.
"""
import logging
import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, Field

from circgate.atomic import (
    CONSTANTS,
    energy_defects,
    reduced_dipole_down,
    reduced_dipole_near_circular,
    reduced_dipole_up,
)
from circgate.config import DEFAULT_EXCLUSION_RADIUS
from circgate.exceptions import DomainError
from circgate.numerics import clebsch_gordan, log_product

logger = logging.getLogger(__name__)


class Orientation(str, Enum):
    PARALLEL = "parallel"
    PERPENDICULAR = "perpendicular"


class PairGeometry(BaseModel):
    separation: float = Field(..., gt=0.0, description="Interatomic separation R (m)")
    orientation: Orientation = Field(default=Orientation.PARALLEL)
    exclusion_radius: float = Field(default=DEFAULT_EXCLUSION_RADIUS, gt=0.0)

    @property
    def inside_exclusion(self):
        return self.separation < self.exclusion_radius


class BlockadeResult(BaseModel):
    n: int
    separation: float
    orientation: Orientation
    v_dd: float = Field(..., description="Dipole-dipole coupling (rad/s)")
    delta: float = Field(..., description="Forster defect (rad/s)")
    u_plus: float
    u_minus: float
    blockade_shift_B: float = Field(..., description="Blockade shift (rad/s)")
    inside_exclusion: bool = False

    @property
    def blockade_shift_hz(self):
        return self.blockade_shift_B / (2 * math.pi)


def _coupling_unit(separation, constants=CONSTANTS):
    """e^2 a0^2 / (4 pi eps0 R^3) expressed as an angular frequency."""
    if separation <= 0:
        raise DomainError(f"separation must be > 0, got {separation}")
    energy = constants.e ** 2 * constants.a0 ** 2 / (4 * math.pi * constants.epsilon0 * separation ** 3)
    return energy / constants.hbar


def vdd_parallel_factor(n):
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    return log_product(
        [
            (8, 1),
            (2, 4 * n),
            (n, 2 * n + 4),
            (n * n - 1, n + 2),
            (2 * n + 1, -(2 * n + 3)),
            (2 * n - 1, -(2 * n + 1)),
        ]
    )


def vdd_perpendicular_factor(n):
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    return 27 / 8 * n * n * (n - 1)


def vdd_parallel(n, separation, constants=CONSTANTS):
    return vdd_parallel_factor(n) * _coupling_unit(separation, constants)


def vdd_perpendicular(n, separation, constants=CONSTANTS):
    return vdd_perpendicular_factor(n) * _coupling_unit(separation, constants)


def vdd_parallel_assembled(n):
    """Dimensionless parallel coupling built from Clebsch-Gordan coefficients and reduced elements.

    <c_{n+1} c_{n-1}| -sqrt(6) sum_p C(1p,1-p|20) r_Ap r_B-p |c_n c_n> in units of
    e^2 a0^2 / (4 pi eps0 R^3).
    """
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    radial = reduced_dipole_up(n) * reduced_dipole_down(n) / math.sqrt((2 * n + 1) * (2 * n - 3))
    angular = (
        clebsch_gordan(1, 1, 1, -1, 2, 0)
        * clebsch_gordan(n - 1, n - 1, 1, 1, n, n)
        * clebsch_gordan(n - 1, n - 1, 1, -1, n - 2, n - 2)
    )
    return -math.sqrt(6) * radial * angular


def vdd_perpendicular_assembled(n):
    """Dimensionless resonant coupling |c_n c_n> -> |n,n-2,n-2>^2, same units as above.

    Carries the operator's overall sign; the closed form quotes the magnitude.
    """
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    radial = reduced_dipole_near_circular(n) ** 2 / (2 * n - 3)
    angular = clebsch_gordan(1, -1, 1, -1, 2, -2) * clebsch_gordan(n - 1, n - 1, 1, -1, n - 2, n - 2) ** 2
    return -1.5 * radial * angular


def forster_hamiltonian(delta, v_dd):
    return np.array([[0.0, v_dd], [v_dd, delta]], dtype=float)


def two_level_eigenvalues(delta, v_dd):
    """Roots of lambda^2 - delta*lambda - V^2 = 0 as (u_plus, u_minus).

    The root closer to zero uses the 2V^2/(|delta| + disc) form.
    """
    disc = math.hypot(delta, 2 * v_dd)
    v_sq = v_dd * v_dd
    if delta < 0:
        u_plus = 2 * v_sq / (disc - delta)
        u_minus = (delta - disc) / 2
    else:
        u_plus = (delta + disc) / 2
        u_minus = -2 * v_sq / (delta + disc) if delta + disc > 0 else 0.0
    return u_plus, u_minus


def blockade_shift(n, separation, orientation=Orientation.PARALLEL, exclusion_radius=DEFAULT_EXCLUSION_RADIUS,
                   warn_on_overlap=True, constants=CONSTANTS):
    geometry = PairGeometry(separation=separation, orientation=orientation, exclusion_radius=exclusion_radius)
    if geometry.inside_exclusion and warn_on_overlap:
        logger.warning(
            f"Separation {separation:.3e} m is inside the exclusion radius {exclusion_radius:.3e} m; "
            f"wavefunction overlap is not negligible"
        )
    if geometry.orientation is Orientation.PARALLEL:
        v_dd = vdd_parallel(n, separation, constants)
        delta = energy_defects(n, constants).delta
    else:
        v_dd = vdd_perpendicular(n, separation, constants)
        delta = 0.0
    u_plus, u_minus = two_level_eigenvalues(delta, v_dd)
    return BlockadeResult(
        n=n,
        separation=separation,
        orientation=geometry.orientation,
        v_dd=v_dd,
        delta=delta,
        u_plus=u_plus,
        u_minus=u_minus,
        blockade_shift_B=u_plus,
        inside_exclusion=geometry.inside_exclusion,
    )


def defect_ratio(n, constants=CONSTANTS):
    defects = energy_defects(n, constants)
    return abs(defects.delta / defects.delta_prime)

"""Analytic intrinsic error of the blockade CZ gate.

The computational-basis error averages over the four logical inputs and has a
Rydberg-decay part and a blockade-leakage part.  Balancing the leading terms
of each for omega_10 -> infinity gives the optimal Rabi frequency and the
minimum error, which depend on B and tau only through B*tau.
"""
import logging
import math

from pydantic import BaseModel, ConfigDict, Field

from circgate.atomic import lifetime
from circgate.blockade import blockade_shift
from circgate.config import CS_CLOCK_OMEGA_10, DEFAULT_EXCLUSION_RADIUS
from circgate.exceptions import DomainError

logger = logging.getLogger(__name__)

SEVEN_PI = 7 * math.pi


class GateParams(BaseModel):
    model_config = ConfigDict(frozen=True, ser_json_inf_nan="strings")

    omega: float = Field(..., gt=0.0, description="Rabi frequency Omega (rad/s)")
    omega_10: float = Field(default=CS_CLOCK_OMEGA_10, gt=0.0, description="Qubit splitting (rad/s)")
    blockade_B: float = Field(..., gt=0.0, description="Blockade shift (rad/s)")
    tau: float = Field(..., gt=0.0, description="Rydberg lifetime (s); inf disables decay")

    @property
    def gamma_r(self):
        return 0.0 if math.isinf(self.tau) else 1.0 / self.tau

    @property
    def pi_duration(self):
        return math.pi / self.omega

    @property
    def gate_duration(self):
        return 4 * math.pi / self.omega

    @property
    def strong_blockade(self):
        return self.omega < self.blockade_B / 10 and self.blockade_B < self.omega_10


class ErrorBudget(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="strings")

    decay: float = Field(..., description="Rydberg decay contribution")
    blockade: float = Field(..., description="Blockade leakage contribution")
    total: float
    minimum: float = Field(..., description="Minimum error at the optimal Rabi frequency, omega_10 -> inf")


def _decay_term(p):
    if p.gamma_r == 0.0:
        return 0.0
    ratio = (p.omega / p.omega_10) ** 2 + (p.omega / p.blockade_B) ** 2 / 7
    return 7 * math.pi / (4 * p.omega * p.tau) * (1 + ratio)


def _blockade_term(p):
    # (Omega^2 / 8 B^2)(1 + 6 B^2 / omega_10^2), expanded so B -> inf stays finite
    return p.omega ** 2 / (8 * p.blockade_B ** 2) + 0.75 * (p.omega / p.omega_10) ** 2


def intrinsic_error_E1(p):
    return _decay_term(p) + _blockade_term(p)


def _check_positive(**values):
    for name, value in values.items():
        if not value > 0:
            raise DomainError(f"{name} must be > 0, got {value}")


def optimal_rabi(blockade_B, tau):
    _check_positive(blockade_B=blockade_B, tau=tau)
    return SEVEN_PI ** (1 / 3) * blockade_B ** (2 / 3) / tau ** (1 / 3)


def min_error(blockade_B, tau):
    _check_positive(blockade_B=blockade_B, tau=tau)
    return 3 * SEVEN_PI ** (2 / 3) / 8 / (blockade_B * tau) ** (2 / 3)


def stirap_intermediate_error(p_int, omega, tau_int):
    """Spontaneous emission from ladder intermediates during a pi transfer."""
    if not 0 <= p_int <= 1:
        raise DomainError(f"p_int must lie in [0, 1], got {p_int}")
    _check_positive(omega=omega, tau_int=tau_int)
    return math.pi * p_int / (omega * tau_int)


def error_budget(p):
    decay = _decay_term(p)
    blockade = _blockade_term(p)
    return ErrorBudget(decay=decay, blockade=blockade, total=decay + blockade,
                       minimum=min_error(p.blockade_B, p.tau))


def gate_params_for(n, temperature=0.0, separation=2e-6, omega_10=CS_CLOCK_OMEGA_10, omega=None, tau=None,
                    blockade_B=None, exclusion_radius=DEFAULT_EXCLUSION_RADIUS):
    """GateParams for c_n at the given temperature and separation.

    Each of omega, tau and blockade_B may be overridden; omega defaults to the
    optimum for the resulting (B, tau).
    """
    if blockade_B is None:
        blockade_B = blockade_shift(n, separation, exclusion_radius=exclusion_radius).blockade_shift_B
    if tau is None:
        tau = lifetime(n, temperature)
    if omega is None:
        if math.isinf(tau):
            raise DomainError("An explicit omega is required when tau is infinite")
        omega = optimal_rabi(blockade_B, tau)
    params = GateParams(omega=omega, omega_10=omega_10, blockade_B=blockade_B, tau=tau)
    if not params.strong_blockade:
        logger.warning(
            f"Strong-blockade conditions violated: Omega={omega:.3e}, B={blockade_B:.3e}, omega_10={omega_10:.3e} rad/s"
        )
    logger.debug(f"Gate parameters for n={n}, T={temperature} K, R={separation:.3e} m: {params}")
    return params


def gate_params_from_config(config):
    return gate_params_for(
        config.n,
        temperature=config.temperature,
        separation=config.separation,
        omega_10=config.omega_10,
        omega=config.omega,
        tau=config.tau,
        blockade_B=config.blockade_B,
        exclusion_radius=config.exclusion_radius,
    )

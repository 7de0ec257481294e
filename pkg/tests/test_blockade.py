import logging
import math

import mpmath
import numpy as np
import pytest
from pydantic import ValidationError

from circgate.blockade import (
    Orientation,
    blockade_shift,
    defect_ratio,
    forster_hamiltonian,
    two_level_eigenvalues,
    vdd_parallel,
    vdd_parallel_assembled,
    vdd_parallel_factor,
    vdd_perpendicular,
    vdd_perpendicular_assembled,
    vdd_perpendicular_factor,
)
from circgate.exceptions import DomainError
from circgate.numerics import hermitian_eig

TWO_PI = 2 * math.pi


@pytest.mark.parametrize(
    "n, computed_ghz, printed_ghz",
    [(80, 2.220, 2.21), (100, 5.904, 5.89), (110, 8.733, 8.71)],
)
def test_blockade_shift_at_two_microns(n, computed_ghz, printed_ghz):
    result = blockade_shift(n, 2e-6)
    assert result.blockade_shift_hz / 1e9 == pytest.approx(computed_ghz, rel=2e-3)
    assert result.blockade_shift_hz / 1e9 == pytest.approx(printed_ghz, rel=0.02)
    assert result.blockade_shift_B == result.u_plus
    assert result.delta < 0


@pytest.mark.parametrize("n", [2, 3, 10, 50, 110])
def test_parallel_closed_form_matches_angular_assembly(n):
    assert abs(vdd_parallel_assembled(n)) == pytest.approx(vdd_parallel_factor(n), rel=1e-9)


@pytest.mark.parametrize("n", [2, 3, 10, 100])
def test_perpendicular_closed_form_matches_angular_assembly(n):
    assert abs(vdd_perpendicular_assembled(n)) == pytest.approx(vdd_perpendicular_factor(n), rel=1e-12)


def test_parallel_factor_against_arbitrary_precision():
    mpmath.mp.dps = 60
    n = mpmath.mpf(110)
    expected = 8 * 2 ** (4 * n) * n ** (2 * n + 4) * (n * n - 1) ** (n + 2) \
        / ((2 * n + 1) ** (2 * n + 3) * (2 * n - 1) ** (2 * n + 1))
    assert vdd_parallel_factor(110) == pytest.approx(float(expected), rel=1e-10)


def test_parallel_factor_large_n_limit_is_half_n_to_the_fourth():
    n = 2000
    assert vdd_parallel_factor(n) / n ** 4 == pytest.approx(0.5, rel=0.01)


def test_couplings_scale_as_inverse_cube():
    assert vdd_parallel(100, 1e-6) / vdd_parallel(100, 2e-6) == pytest.approx(8.0, rel=1e-12)
    assert vdd_perpendicular(100, 3e-6) / vdd_perpendicular(100, 6e-6) == pytest.approx(8.0, rel=1e-12)


def test_factor_domain():
    with pytest.raises(DomainError):
        vdd_parallel_factor(1)
    with pytest.raises(DomainError):
        vdd_perpendicular_factor(0)


@pytest.mark.parametrize("delta, v", [(-1.0, 0.3), (2.0, 0.5), (0.0, 1.0), (-3.0, 10.0)])
def test_two_level_eigenvalues_match_diagonalization(delta, v):
    u_plus, u_minus = two_level_eigenvalues(delta, v)
    eigenvalues, _ = hermitian_eig(forster_hamiltonian(delta, v))
    np.testing.assert_allclose([u_minus, u_plus], eigenvalues, atol=1e-12)


def test_two_level_eigenvalues_without_cancellation():
    u_plus, _ = two_level_eigenvalues(-1.0, 1e-9)
    assert u_plus == pytest.approx(1e-18, rel=1e-9)


def test_van_der_waals_and_resonant_limits():
    u_weak, _ = two_level_eigenvalues(-1.0, 0.05)
    assert u_weak == pytest.approx(0.05 ** 2, rel=0.01)
    u_strong, _ = two_level_eigenvalues(-1.0, 50.0)
    assert u_strong == pytest.approx(50.0, rel=0.02)


def _log_slope(v, delta=-1.0, step=1.001):
    return math.log(two_level_eigenvalues(delta, v * step)[0] / two_level_eigenvalues(delta, v)[0]) / math.log(step)


def test_separation_slopes():
    # B ~ V^2 ~ R^-6 when V << |delta|, B ~ V ~ R^-3 when V >> |delta|
    assert _log_slope(0.1) == pytest.approx(2.0, abs=0.05)
    assert _log_slope(30.0) == pytest.approx(1.0, abs=0.05)


def test_blockade_decreases_with_separation():
    values = [blockade_shift(110, r * 1e-6, warn_on_overlap=False).blockade_shift_B for r in (2, 3, 5, 8)]
    assert values == sorted(values, reverse=True)


def test_perpendicular_geometry_is_resonant():
    result = blockade_shift(100, 2e-6, orientation=Orientation.PERPENDICULAR)
    assert result.delta == 0.0
    assert result.blockade_shift_B == pytest.approx(vdd_perpendicular(100, 2e-6), rel=1e-12)
    assert result.orientation is Orientation.PERPENDICULAR


def test_overlap_warning(caplog):
    caplog.set_level(logging.WARNING, logger="circgate.blockade")
    result = blockade_shift(110, 1e-6)
    assert result.inside_exclusion
    assert "exclusion radius" in caplog.text

    caplog.clear()
    quiet = blockade_shift(110, 1e-6, warn_on_overlap=False)
    assert quiet.inside_exclusion
    assert caplog.text == ""


def test_geometry_validation():
    with pytest.raises(ValidationError):
        blockade_shift(110, 0.0)
    with pytest.raises(ValidationError):
        blockade_shift(110, 2e-6, orientation="diagonal")


def test_defect_ratio_favours_the_nearest_channel():
    assert defect_ratio(110) == pytest.approx(3 / 110, rel=0.1)
    assert defect_ratio(110) < 0.05

import math

import numpy as np
import pytest
from sympy import totient

from siegel_lab.errors import PreconditionError
from siegel_lab.exp_sums import (
    PeriodicWeight,
    char_shift_sum,
    estermann_bound,
    estermann_max_ratio,
    hyperbola_bound,
    hyperbola_fourier_coeff,
    hyperbola_fourier_matrix,
    kloosterman,
    kloosterman_matrix,
    mfe_alpha,
    mfe_decompose,
    unit_roots,
    weil_interval_bound,
    weil_interval_sum,
)
from siegel_lab.quad_char import QuadChar


def test_kloosterman_known_values():
    assert kloosterman(1, 1, 5) == pytest.approx(2 + 2 * math.cos(4 * math.pi / 5), abs=1e-12)
    assert kloosterman(0, 0, 12) == pytest.approx(int(totient(12)))
    assert kloosterman(3, 7, 1) == 1


def test_kloosterman_sums_are_real_and_symmetric():
    for q in (7, 12, 25):
        for u1, u2 in ((1, 2), (3, 3), (5, 0)):
            value = kloosterman(u1, u2, q)
            assert abs(value.imag) < 1e-10
            assert value == pytest.approx(kloosterman(u2, u1, q), abs=1e-10)


def test_matrix_matches_pointwise():
    q = 18
    matrix = kloosterman_matrix(q)
    for u1, u2 in ((0, 0), (1, 5), (6, 9), (17, 2)):
        assert matrix[u1, u2] == pytest.approx(kloosterman(u1, u2, q), abs=1e-10)


def test_estermann_bound_small_moduli():
    for q in range(1, 61):
        assert estermann_max_ratio(q) <= 1.0 + 1e-9
    assert estermann_bound(1, 1, 5) == pytest.approx(2 * math.sqrt(5))


def test_twisted_multiplicativity():
    q1, q2 = 8, 15
    inv2, inv1 = pow(q2, -1, q1), pow(q1, -1, q2)
    for u1, u2 in ((1, 1), (2, 7), (0, 3)):
        split = kloosterman(u1 * inv2, u2 * inv2, q1) * kloosterman(u1 * inv1, u2 * inv1, q2)
        assert kloosterman(u1, u2, q1 * q2) == pytest.approx(split, abs=1e-9)


def test_unit_roots_are_shared_and_read_only():
    assert unit_roots(12) is unit_roots(12)
    with pytest.raises(ValueError):
        unit_roots(12)[0] = 0


def test_periodic_weight_validation():
    with pytest.raises(PreconditionError):
        PeriodicWeight(2, np.full((2, 2), 1.5))
    with pytest.raises(PreconditionError):
        PeriodicWeight(3, np.ones((2, 2)))
    with pytest.raises(PreconditionError):
        PeriodicWeight.constant(4).lift(6)


def test_hyperbola_coefficient_reduces_to_kloosterman():
    q, a = 13, 5
    f = PeriodicWeight.constant()
    for u1, u2 in ((1, 1), (2, 9), (0, 4)):
        coeff = hyperbola_fourier_coeff(q, a, 1, f, u1, u2)
        assert coeff == pytest.approx(kloosterman(u1, a * u2, q) / q**2, abs=1e-12)


def test_hyperbola_zero_frequency_counts_solutions():
    q, a = 12, 4
    count = sum(1 for n1 in range(q) for n2 in range(q) if (n1 * n2 - a) % q == 0)
    coeff = hyperbola_fourier_coeff(q, a, 4, PeriodicWeight.constant(), 0, 0)
    assert coeff == pytest.approx(count / q**2)


def test_hyperbola_matrix_matches_direct_sum():
    rng = np.random.default_rng(5)
    f = PeriodicWeight.random(3, rng)
    q, a, q0 = 12, 3, 3
    matrix = hyperbola_fourier_matrix(q, a, q0, f)
    for u1, u2 in ((0, 0), (1, 2), (5, 11), (7, 3)):
        assert matrix[u1, u2] == pytest.approx(hyperbola_fourier_coeff(q, a, q0, f, u1, u2), abs=1e-12)


def test_hyperbola_preconditions():
    f = PeriodicWeight.constant()
    with pytest.raises(PreconditionError):
        hyperbola_fourier_coeff(12, 1, 5, f, 0, 0)
    with pytest.raises(PreconditionError):
        hyperbola_fourier_coeff(12, 4, 2, f, 0, 0)


@pytest.mark.parametrize(
    "q,a,q0",
    [(12, 1, 1), (12, 2, 2), (12, 4, 4), (18, 3, 3), (20, 5, 5), (30, 6, 6), (27, 1, 3), (16, 2, 4)],
)
def test_mfe_decomposition(q, a, q0):
    rng = np.random.default_rng(q * 100 + a)
    f = PeriodicWeight.random(q0, rng)
    mfe = mfe_decompose(q, a, q0, f)
    assert mfe.identity_residual <= 1e-9
    assert mfe.excluded_max <= 1e-9
    assert mfe.max_bound_ratio() <= 1.0
    step = q // q0
    assert all(u1 % step and u2 % step for u1, u2 in mfe.fourier_part())
    coeffs = np.abs(hyperbola_fourier_matrix(q, a, q0, f))
    for u1 in range(q):
        for u2 in range(q):
            assert coeffs[u1, u2] <= hyperbola_bound(q, q0, u1, u2) * (1 + 1e-9)


def test_mfe_alpha_for_prime_modulus():
    q = 7
    assert mfe_alpha(q, 1, 1) == pytest.approx(q / (q - 1))
    assert mfe_decompose(q, 1, 1, PeriodicWeight.constant()).alpha == pytest.approx(q / (q - 1))
    assert mfe_alpha(12, 1, 12) == 1.0


def test_char_shift_sum():
    chi = QuadChar(-7)
    result = char_shift_sum(chi, [(0, 1, 1), (2, 3, None)], 1, 5000, 5000)
    ns = np.arange(1, 5001)
    expected = np.sum(((ns + 2) % 3 == 0) * chi.values(ns)) / 5000
    assert result.value == pytest.approx(expected, abs=1e-12)
    assert result.ratio == pytest.approx(abs(result.value) / result.skeleton)
    with pytest.raises(PreconditionError):
        char_shift_sum(chi, [(0, 2, None)], 1, 10, 10)
    with pytest.raises(PreconditionError):
        char_shift_sum(chi, [(0, 4, 3)], 1, 10, 10)


def test_weil_interval_sum_within_bound():
    chi = QuadChar(-163)
    for h1, h2 in ((0, 1), (0, 5), (3, 10)):
        for lo, length in ((1, 163), (50, 1000), (7, 20)):
            value = weil_interval_sum(chi, h1, h2, lo, lo + length - 1)
            assert abs(value) <= weil_interval_bound(chi, h1, h2, length)
    # the full period sums to -1 when the shifts are distinct mod a prime conductor
    assert weil_interval_sum(chi, 0, 1, 0, 162) == -1
    assert weil_interval_sum(chi, 0, 0, 5, 4) == 0

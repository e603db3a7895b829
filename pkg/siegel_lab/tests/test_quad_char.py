import math
import warnings

import numpy as np
import pytest
from sympy.functions.combinatorial.numbers import jacobi_symbol

from siegel_lab.errors import InvalidDiscriminantError, QualityBelowFloorError, RangeTooSmallError
from siegel_lab.quad_char import (
    QuadChar,
    chi_eval,
    exceptional_primes,
    exceptional_sum_report,
    fundamental_discriminants,
    is_fundamental_discriminant,
    kronecker,
    l_one,
    l_prime_one,
    one_star_chi_partial,
    quality_proxy,
)
from siegel_lab.selftest import class_number_l_one


@pytest.mark.parametrize("delta", [-3, -4, -7, -8, -163, 5, 8, 12, 13])
def test_fundamental_discriminants_accepted(delta):
    assert is_fundamental_discriminant(delta)
    QuadChar(delta)


@pytest.mark.parametrize("delta", [0, 1, -1, 4, -12, 9, 2, -16])
def test_non_fundamental_rejected(delta):
    assert not is_fundamental_discriminant(delta)
    with pytest.raises(InvalidDiscriminantError):
        QuadChar(delta)


def test_kronecker_agrees_with_jacobi_on_odd_moduli():
    for delta in (-163, -7, 5, 13):
        assert kronecker(delta, 1) == 1
        for n in range(3, 400, 2):
            assert kronecker(delta, n) == jacobi_symbol(delta % n, n)


def test_kronecker_raises_no_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        values = [kronecker(-163, n) for n in range(1, 200)]
    assert all(type(v) is int for v in values)
    assert QuadChar(-4).table.dtype.kind == "i"


def test_character_is_completely_multiplicative_and_periodic(chi163):
    for m in range(1, 60):
        for n in range(1, 60):
            assert chi163(m * n) == chi163(m) * chi163(n)
    assert chi163(5) == chi163(5 + 163)
    assert chi163(163) == 0


def test_chi_minus_four():
    chi = QuadChar(-4)
    assert [chi(n) for n in range(1, 9)] == [1, 0, -1, 0, 1, 0, -1, 0]
    assert chi_eval(chi, 0) == 0


def test_character_sum_over_period_vanishes():
    for delta in fundamental_discriminants(60):
        chi = QuadChar(delta)
        assert int(chi.table.astype(np.int64).sum()) == 0


def test_l_one_known_values():
    assert l_one(QuadChar(-4)) == pytest.approx(math.pi / 4, abs=1e-10)
    assert l_one(QuadChar(-163)) == pytest.approx(math.pi / math.sqrt(163), abs=1e-10)
    golden = (1 + math.sqrt(5)) / 2
    assert l_one(QuadChar(5)) == pytest.approx(2 * math.log(golden) / math.sqrt(5), abs=1e-10)


def test_l_prime_one_for_minus_four():
    assert l_prime_one(QuadChar(-4)) == pytest.approx(0.192901316796912, abs=1e-9)


def test_class_number_formula_small_range():
    for delta in fundamental_discriminants(60):
        assert l_one(QuadChar(delta)) == pytest.approx(class_number_l_one(delta), abs=1e-8), delta


def test_quality_proxy():
    chi = QuadChar(-163)
    user = quality_proxy(chi, 50.0)
    assert user.eta_hat == 50.0 and user.method == "user-supplied"
    computed = quality_proxy(chi)
    assert computed.method == "lprime-ratio"
    assert computed.eta_hat >= 10.0
    with pytest.raises(QualityBelowFloorError):
        quality_proxy(chi, 5.0)


def test_exceptional_primes(chi4):
    assert list(exceptional_primes(chi4, 1, 30)) == [2, 5, 13, 17, 29]


def test_one_star_chi_partial_grows_like_l_one_log(chi4):
    x = 20000
    value = one_star_chi_partial(chi4, x)
    direct = math.fsum(
        sum(chi4(d) for d in range(1, n + 1) if n % d == 0) / n for n in range(1, 2001)
    )
    assert one_star_chi_partial(chi4, 2000) == pytest.approx(direct, abs=1e-9)
    assert value / math.log(x) == pytest.approx(math.pi / 4, rel=0.2)


def test_exceptional_sum_report(chi163):
    eta = quality_proxy(chi163, 100.0)
    report = exceptional_sum_report(chi163, 10**5, 0.1, eta)
    assert report.lower == pytest.approx(163**0.55)
    assert report.lhs > 0
    assert [band.m for band in report.bands] == [2, 3]
    with pytest.raises(RangeTooSmallError):
        exceptional_sum_report(chi163, 5, 0.1, eta)

import math

import numpy as np
import pytest

from siegel_lab.approximants import (
    HANDLE_NAMES,
    ApproximantBank,
    Lambda_flat,
    Lambda_sharp,
    Lambda_siegel,
    chi_log,
    chi_log_sharp,
    chi_log_window,
    lambda_agreement_predicate,
    lambda_flat,
    lambda_flat_coeffs,
    lambda_flat_direct,
    lambda_sharp,
    lambda_sharp_coeffs,
    lambda_siegel,
    lambda_siegel_window,
    liouville_error_diagnostic,
    psi_big_coeffs,
    sharp_kernel,
    siegel_params,
)
from siegel_lab.arith_tables import build_window
from siegel_lab.errors import EvaluationError, PreconditionError, TypeICutoffTooLargeError
from siegel_lab.quad_char import QuadChar, quality_proxy


@pytest.fixture
def chi3():
    return QuadChar(-3)


@pytest.fixture
def small_params(chi3):
    return siegel_params(10**4, 1, 0, 0.5, quality_proxy(chi3, 50.0), R=30.0, D=2.0, R0=10.0)


def test_scales_from_formulas_are_clamped(chi163):
    params = siegel_params(10**6, 2, 0, 0.5, quality_proxy(chi163, 50.0))
    assert params.R.provenance == "formula"
    assert 2.0 <= params.R.value <= 10**6
    assert params.D.provenance == "clamped"
    assert params.D.value == 2.0
    assert params.R0.value <= params.R.value


def test_overrides_must_be_in_range(chi163):
    eta = quality_proxy(chi163, 50.0)
    params = siegel_params(10**6, 2, 0, 0.5, eta, R=200.0, D=1000.0)
    assert (params.R.value, params.R.provenance) == (200.0, "override")
    assert params.D.value == 1000.0
    with pytest.raises(PreconditionError):
        siegel_params(1000, 1, 0, 0.5, eta, D=5000.0)
    with pytest.raises(PreconditionError):
        siegel_params(10**6, 1, 0, 0.5, eta, R=100.0, R0=500.0)
    with pytest.raises(PreconditionError):
        siegel_params(10**6, 1, 0, 1.5, eta)


def test_lambda_siegel_on_primes(chi4):
    assert lambda_siegel(7, 30.0, chi4) == -1
    assert lambda_siegel(37, 30.0, chi4) == 1
    assert lambda_siegel(43, 30.0, chi4) == -1
    assert lambda_siegel(37 * 43 * 2, 30.0, chi4) == 1
    window = lambda_siegel_window(1, 2000, 30.0, chi4)
    assert all(window[n - 1] == lambda_siegel(n, 30.0, chi4) for n in range(1, 2001))


def test_agreement_predicate_implies_agreement(chi4):
    liouville = build_window(1, 5000).liouville
    model = lambda_siegel_window(1, 5000, 30.0, chi4)
    for n in range(1, 5001):
        if lambda_agreement_predicate(n, 30.0, chi4):
            assert liouville[n - 1] == model[n - 1], n
    assert not lambda_agreement_predicate(37, 30.0, chi4)
    assert lambda_agreement_predicate(43, 30.0, chi4)


@pytest.mark.parametrize("delta,R,D", [(-4, 30.0, 10.0), (-4, 100.0, 50.0), (-3, 30.0, 4.0)])
def test_lambda_split(delta, R, D):
    chi = QuadChar(delta)
    limit = 3000
    sharp = lambda_sharp_coeffs(R, D, chi).window(1, limit, chi)
    flat = lambda_flat_coeffs(R, D, chi, limit).window(1, limit, chi)
    model = lambda_siegel_window(1, limit, R, chi)
    assert np.max(np.abs(sharp + flat - model)) <= 1e-9
    for n in (1, 12, 97, 360, 2310, 2999):
        assert lambda_sharp(n, R, D, chi) + lambda_flat_direct(n, R, D, chi) == pytest.approx(
            lambda_siegel(n, R, chi), abs=1e-9
        )


def test_lambda_flat_uses_params(chi3, small_params):
    n = 1800
    assert lambda_flat(n, small_params, chi3) == pytest.approx(
        lambda_flat_direct(n, 30.0, 2.0, chi3), abs=1e-9
    )


def test_type_i_cutoff_bound(chi4):
    with pytest.raises(TypeICutoffTooLargeError):
        lambda_sharp_coeffs(30.0, 5000.0, chi4, max_cutoff=1000)
    coeffs = lambda_sharp_coeffs(30.0, 10.0, chi4)
    assert max(coeffs.entries) < 10
    assert coeffs.entries[1] == 1.0


def test_chi_log(chi4):
    window = chi_log_window(1, 500, chi4)
    for n in (1, 2, 5, 25, 97, 500):
        assert window[n - 1] == pytest.approx(chi_log(n, chi4), abs=1e-12)
    assert chi_log(97, chi4) == pytest.approx(math.log(97))
    assert Lambda_siegel(97, 30.0, chi4) == pytest.approx(math.log(97))


def test_chi_log_is_never_negative(chi4):
    assert np.all(chi_log_window(1, 5000, chi4) >= -1e-9)
    assert chi_log(21, chi4) == pytest.approx(0.0, abs=1e-12)


def test_negative_chi_log_is_reported():
    class Flipped:
        def __call__(self, n):
            return -1

        def values(self, ns):
            return -np.ones(ns.shape)

    with pytest.raises(EvaluationError, match="n=2"):
        chi_log_window(1, 50, Flipped())
    with pytest.raises(EvaluationError, match="n=6"):
        chi_log(6, Flipped())


def test_lambda_siegel_is_lambda_when_R_covers_the_range(chi3):
    x = 3000
    liouville = build_window(1, x).liouville.astype(np.float64)
    assert np.array_equal(lambda_siegel_window(1, x, float(x), chi3), liouville)
    assert all(lambda_agreement_predicate(n, float(x), chi3) for n in range(1, x + 1, 37))


def test_flat_window_matches_the_direct_flat_integral(chi3, small_params):
    kernel = sharp_kernel(small_params, chi3, 1e-11)
    hi = 400
    flat = kernel.flat_window(1, hi)
    split = chi_log_window(1, hi, chi3) - kernel.window(1, hi)
    assert np.max(np.abs(flat - split)) < 1e-8
    for n in (1, 12, 97, 210, 360, 400):
        assert flat[n - 1] == pytest.approx(kernel.flat_direct(n), abs=1e-8), n


def test_sharp_kernel_representations_agree(chi3, small_params):
    kernel = sharp_kernel(small_params, chi3)
    assert not kernel.middle_window_empty
    assert kernel.c(3) == pytest.approx(math.log(3))
    window = kernel.window(1, 2 * small_params.x)
    for n in (1, 6, 36, 97, 1000, 5040, 10007, 19999):
        value = kernel.evaluate(n)
        assert window[n - 1] == pytest.approx(value, abs=1e-9)
        assert kernel.via_integrals(n) == pytest.approx(value, abs=1e-6)
        assert value + kernel.flat_direct(n) == pytest.approx(chi_log(n, chi3), abs=1e-6)


def test_sharp_part_is_exact_for_small_n(chi3, small_params):
    # every divisor of n lies below T/e and Psi vanishes below x/T^2
    for n in (4, 5, 6):
        assert chi_log_sharp(n, small_params, chi3) == pytest.approx(chi_log(n, chi3), abs=1e-12)
    with pytest.raises(PreconditionError):
        chi_log_sharp(3 * small_params.x, small_params, chi3)


def test_big_lambda_split(chi3, small_params):
    for n in (97, 600, 9973):
        total = Lambda_sharp(n, small_params, chi3) + Lambda_flat(n, small_params, chi3)
        assert total == pytest.approx(Lambda_siegel(n, 30.0, chi3), abs=1e-9)


def test_psi_big_coeffs_rebuild_the_sharp_part(chi3, small_params):
    big_psi, coeffs = psi_big_coeffs(small_params, chi3)
    n = 720
    rebuilt = math.fsum(
        big_psi(n // d) * chi3(d) + coeffs.entries.get(d, 0.0) * chi3(n // d)
        for d in range(1, n + 1)
        if n % d == 0
    )
    assert rebuilt == pytest.approx(sharp_kernel(small_params, chi3).evaluate(n), abs=1e-9)


def test_bank_handles(chi3, small_params):
    bank = ApproximantBank(chi=chi3, params=small_params)
    assert set(bank.names()) == set(HANDLE_NAMES)
    table = build_window(100, 400)
    assert np.array_equal(bank.handle("lambda")(100, 400), table.liouville.astype(float))
    assert np.array_equal(bank.handle("mangoldt")(100, 400), table.mangoldt)
    sharp = bank.handle("Lambda_sharp")(1, 3000)
    flat = bank.handle("Lambda_flat")(1, 3000)
    full = bank.handle("Lambda_siegel")(1, 3000)
    assert np.max(np.abs(sharp + flat - full)) <= 1e-9
    lam = bank.handle("lambda_sharp")(1, 3000) + bank.handle("lambda_flat")(1, 3000)
    assert np.max(np.abs(lam - bank.handle("lambda_siegel")(1, 3000))) <= 1e-12
    with pytest.raises(PreconditionError):
        bank.handle("zeta")
    with pytest.raises(PreconditionError):
        ApproximantBank().handle("chi")


def test_liouville_error_diagnostic(chi4):
    report = liouville_error_diagnostic(5000, 5000, 30.0, chi4)
    assert report.uncovered == 0
    assert report.mismatches > 0
    assert report.max_ratio <= 2.0
    with pytest.raises(PreconditionError):
        liouville_error_diagnostic(20000, 5000, 30.0, chi4)

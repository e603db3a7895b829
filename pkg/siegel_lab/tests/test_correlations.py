import json
import math
from fractions import Fraction

import numpy as np
import pytest

from siegel_lab.approximants import ApproximantBank, chi_log_flat, siegel_params
from siegel_lab.correlations import (
    LINE_LABELS,
    beta_p,
    chain_report,
    chain_rows,
    correlate,
    correlate_named,
    crt_merge,
    level_of_distribution_scan,
    parse_factor,
    singular_series,
    sweep,
)
from siegel_lab.errors import CutoffTooSmallError, EvaluationError, PreconditionError
from siegel_lab.quad_char import QuadChar, quality_proxy
from siegel_lab.schemas import ShiftSystem

TWIN_PRIME_SERIES = 1.32032363169373914785


def test_beta_p_examples():
    assert beta_p([0, 1], 2) == 0
    assert beta_p([0, 2], 3) == Fraction(3, 4)
    assert beta_p([0], 7) == 1


def test_twin_prime_series():
    series = singular_series([0, 2], 10**6)
    assert series.value == pytest.approx(TWIN_PRIME_SERIES, abs=2e-7)
    assert series.lower <= TWIN_PRIME_SERIES <= series.upper
    assert series.tail > 0


def test_enclosures_shrink_and_overlap():
    coarse = singular_series([0, 2], 10**4)
    fine = singular_series([0, 2], 10**5)
    assert fine.tail < coarse.tail
    assert max(coarse.lower, fine.lower) <= min(coarse.upper, fine.upper)


def test_degenerate_series():
    assert singular_series([0, 1], 100).value == 0.0
    assert singular_series([0, 2, 4], 100).value == 0.0
    assert singular_series([0], 100).value == pytest.approx(1.0)
    assert singular_series([], 10).value == 1.0
    with pytest.raises(CutoffTooSmallError):
        singular_series([0, 100], 50)


def test_crt_merge():
    assert crt_merge([(2, 0), (3, 1)]) == (2, 6)
    assert crt_merge([(7, 3)]) == (4, 7)
    assert crt_merge([(2, 0), (2, 1)]) is None
    assert crt_merge([]) == (0, 1)
    assert crt_merge([(4, 1), (6, 3)]) == (3, 12)
    with pytest.raises(PreconditionError):
        crt_merge([(0, 1)])


def test_parse_factor():
    assert parse_factor("lambda:1") == ("lambda", 1)
    assert parse_factor(" mangoldt : 2") == ("mangoldt", 2)


def test_correlate_constant_and_sieved():
    bank = ApproximantBank()
    assert correlate(1000, [(bank.handle("one"), 0), (bank.handle("one"), 5)]) == 1.0
    chebyshev = correlate_named(10**5, [("mangoldt", 0)], bank)
    assert chebyshev == pytest.approx(1.0, abs=0.01)
    assert abs(correlate_named(10**5, [("lambda", 0)], bank)) < 0.02


def test_correlate_is_bitwise_stable_across_threads():
    bank = ApproximantBank()
    factors = [("lambda", 0), ("lambda", 1)]
    single = correlate_named(200_000, factors, bank, window_size=30_000, threads=1)
    multi = correlate_named(200_000, factors, bank, window_size=30_000, threads=4)
    assert single == multi
    other = correlate_named(200_000, factors, bank, window_size=70_000, threads=1)
    assert other == pytest.approx(single, abs=1e-12)


def test_twin_correlation_near_series():
    value = correlate_named(10**6, [("mangoldt", 0), ("mangoldt", 2)], ApproximantBank())
    assert value == pytest.approx(TWIN_PRIME_SERIES, rel=0.1)


def test_correlate_rejects_bad_input():
    one = ApproximantBank().handle("one")
    with pytest.raises(PreconditionError):
        correlate(0, [(one, 0)])
    with pytest.raises(PreconditionError):
        correlate(100, [(one, -1)])
    with pytest.raises(EvaluationError):
        correlate(100, [(lambda lo, hi: np.full(hi - lo + 1, np.nan), 0)])


@pytest.fixture
def chain_setup():
    chi = QuadChar(-3)
    params = siegel_params(20000, 2, 0, 0.5, quality_proxy(chi, 50.0), R=30.0, D=4.0, R0=10.0)
    return chi, params


def test_chain_report(chain_setup):
    chi, params = chain_setup
    shifts = ShiftSystem(h=[0, 2])
    report = chain_report(params, shifts, chi, series_cutoff=10**5, window_size=8192)
    assert report.line_labels == list(LINE_LABELS)
    assert len(report.lines) == 5
    assert all(math.isfinite(v) for v in report.lines)
    raw = correlate_named(20000, [("mangoldt", 0), ("mangoldt", 2)], ApproximantBank(), window_size=8192)
    assert report.lines[0] == raw
    assert report.gaps[-1].absolute == pytest.approx(abs(report.lines[4] - report.singular_series.value))
    assert report.gaps[0].relative == pytest.approx(report.gaps[0].absolute / abs(report.lines[0]))
    assert "timings" not in json.loads(report.model_dump_json())
    again = chain_report(params, shifts, chi, series_cutoff=10**5, window_size=8192, threads=3)
    assert again.model_dump_json() == report.model_dump_json()


def test_chain_with_liouville_factors_has_zero_series(chain_setup):
    chi, params = chain_setup
    report = chain_report(params, ShiftSystem(h=[0], h_prime=[1]), chi, series_cutoff=100)
    assert report.singular_series.value == 0.0
    with pytest.raises(PreconditionError):
        chain_report(params, ShiftSystem(h=[0, 2, 6]), chi)


def test_sweep_rows(chain_setup):
    chi, _ = chain_setup
    eta = quality_proxy(chi, 50.0)
    reports = sweep(
        [5000, 10000],
        lambda x: siegel_params(x, 1, 0, 0.5, eta, R=30.0, D=4.0, R0=10.0),
        ShiftSystem(h=[0]),
        chi,
        series_cutoff=100,
    )
    rows = chain_rows(reports)
    assert [row["x"] for row in rows] == [5000, 10000]
    assert {"line_1", "line_5", "gap_v", "singular_series"} <= set(rows[0])


def test_level_of_distribution_scan(chain_setup):
    chi, params = chain_setup
    result = level_of_distribution_scan(params, chi, 7, 3, 1, 20000)
    assert result.terms == len(range(3, 20001, 7))
    assert math.isfinite(result.value)
    assert result.trivial_bound > 0
    with pytest.raises(PreconditionError):
        level_of_distribution_scan(params, chi, 7, 3, 1, 50000)
    with pytest.raises(PreconditionError):
        level_of_distribution_scan(params, chi, 7, 3, 1, 100, weights=[1.0, 2.0, 0.0])


@pytest.mark.parametrize("h", [[0, 2], [0, 2, 6], [0, 4, 6, 10]])
def test_singular_series_is_translation_invariant(h):
    base = singular_series(h, 10**4)
    moved = singular_series([s + 11 for s in h], 10**4)
    assert moved.value == base.value
    assert moved.tail == base.tail


def test_correlate_is_linear_in_each_factor():
    bank = ApproximantBank()
    liouville, mangoldt, mu = bank.handle("lambda"), bank.handle("mangoldt"), bank.handle("mu")

    def mixed(lo, hi):
        return liouville(lo, hi) + 2.5 * mangoldt(lo, hi)

    x = 10**4
    combined = correlate(x, [(mixed, 0), (mu, 1)])
    separate = correlate(x, [(liouville, 0), (mu, 1)]) + 2.5 * correlate(x, [(mangoldt, 0), (mu, 1)])
    assert combined == pytest.approx(separate, abs=1e-12)


def test_chain_without_factors_is_identically_one(chain_setup):
    chi, params = chain_setup
    report = chain_report(params, ShiftSystem(), chi, series_cutoff=10)
    assert report.lines == [1.0] * 5
    assert report.singular_series.value == 1.0
    assert all(gap.absolute == 0.0 for gap in report.gaps)


def test_first_two_lines_agree_when_R_covers_the_range():
    chi = QuadChar(-3)
    x = 3000
    params = siegel_params(x, 1, 1, 0.5, quality_proxy(chi, 50.0), R=float(x), D=4.0, R0=10.0)
    bank = ApproximantBank(chi=chi, params=params)
    first = correlate_named(x, [("mangoldt", 2), ("lambda", 0)], bank)
    second = correlate_named(x, [("mangoldt", 2), ("lambda_siegel", 0)], bank)
    assert first == second


def test_ld_scan_with_unit_modulus_matches_pointwise_flat_values(chain_setup):
    chi, params = chain_setup
    lo, hi = 19700, 20000
    result = level_of_distribution_scan(params, chi, 1, 0, lo, hi)
    expected = math.fsum(chi_log_flat(n, params, chi) for n in range(lo, hi + 1))
    assert result.terms == hi - lo + 1
    assert result.value == pytest.approx(expected, abs=1e-7)


def test_ld_scan_is_additive_over_a_partition(chain_setup):
    chi, params = chain_setup
    whole = level_of_distribution_scan(params, chi, 7, 3, 1000, 20000)
    left = level_of_distribution_scan(params, chi, 7, 3, 1000, 12345)
    right = level_of_distribution_scan(params, chi, 7, 3, 12346, 20000)
    assert whole.terms == left.terms + right.terms
    assert whole.value == pytest.approx(left.value + right.value, abs=1e-8)

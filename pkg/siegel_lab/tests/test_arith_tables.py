import math

import numpy as np
import pytest

from siegel_lab import arith_tables
from siegel_lab.arith_tables import (
    TypeICoeffs,
    base_primes,
    build_window,
    completely_multiplicative_window,
    dirichlet_window,
    divisors_up_to,
    iter_windows,
    landreau_factor,
    mertens_diagnostics,
    mobius,
    primes_between,
    primes_up_to,
    smooth_rough_split,
)
from siegel_lab.errors import (
    InvalidThresholdsError,
    PreconditionError,
    WindowOverflowError,
    WindowTooLargeError,
)
from siegel_lab.quad_char import QuadChar

from .conftest import oracle


def test_window_from_one_matches_trial_division():
    table = build_window(1, 3000)
    for n in range(1, 3001):
        expected = oracle(n)
        assert table.at("liouville", n) == expected["liouville"], n
        assert table.at("mu", n) == expected["mu"], n
        assert table.at("tau", n) == expected["tau"], n
        assert table.at("spf", n) == expected["spf"], n
        assert table.at("mangoldt", n) == pytest.approx(expected["mangoldt"], abs=1e-12), n


def test_offset_window_matches_trial_division():
    lo = 10**9 + 7
    table = build_window(lo, lo + 500)
    for n in range(lo, lo + 501):
        expected = oracle(n)
        assert table.at("liouville", n) == expected["liouville"]
        assert table.at("spf", n) == expected["spf"]
        assert table.at("tau", n) == expected["tau"]


def test_windows_are_read_only():
    table = build_window(1, 100)
    with pytest.raises(ValueError):
        table.liouville[0] = 0


def test_small_values():
    table = build_window(1, 12)
    assert table.liouville.tolist() == [1, -1, -1, 1, -1, 1, -1, -1, 1, 1, -1, -1]
    assert table.mu.tolist() == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0]
    assert table.at("mangoldt", 8) == pytest.approx(math.log(2))
    assert table.at("mangoldt", 12) == 0.0


def test_window_errors(monkeypatch):
    with pytest.raises(PreconditionError):
        build_window(10, 5)
    with pytest.raises(WindowOverflowError):
        build_window(2**63 - 5, 2**63 + 5)
    monkeypatch.setenv("SIEGEL_LAB_WINDOW_SIZE", "100")
    from siegel_lab.config import get_settings

    get_settings.cache_clear()
    with pytest.raises(WindowTooLargeError):
        build_window(1, 101)


def test_chebyshev_identity():
    table = build_window(1, 5000)
    total = dirichlet_window(lambda m: table.mangoldt[m - 1], lambda m: np.ones(m.shape), 1, 5000)
    assert np.max(np.abs(total - np.log(np.arange(1, 5001)))) < 1e-9


def test_mobius_inversion_in_a_window():
    table = build_window(1, 4000)
    lo, hi = 2500, 4000
    total = dirichlet_window(lambda m: table.mu[m - 1].astype(float), lambda m: np.ones(m.shape), lo, hi)
    assert np.all(total == 0.0)


def test_completely_multiplicative_window_reproduces_liouville():
    values = completely_multiplicative_window(1000, 2000, lambda p: -np.ones(p.shape))
    assert np.array_equal(values, build_window(1000, 2000).liouville.astype(float))


def test_primes():
    assert primes_up_to(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert primes_between(90, 110).tolist() == [97, 101, 103, 107, 109]
    assert primes_up_to(1).size == 0


def test_iter_windows_partition():
    windows = list(iter_windows(1, 10, 4))
    assert windows == [(1, 4), (5, 8), (9, 10)]


def _small_base_cache(monkeypatch, cap: int = 1024) -> None:
    monkeypatch.setenv("SIEGEL_LAB_BASE_PRIME_CACHE", str(cap))
    monkeypatch.setenv("SIEGEL_LAB_WINDOW_SIZE", "4096")
    from siegel_lab.config import get_settings

    get_settings.cache_clear()


def test_base_primes_stream_past_the_cache(monkeypatch):
    _small_base_cache(monkeypatch)
    blocks = list(base_primes(20000))
    assert int(blocks[0].max()) <= 1024
    assert len(blocks) > 2
    assert np.concatenate(blocks).tolist() == primes_up_to(20000).tolist()


def test_window_beyond_the_base_prime_cache(monkeypatch):
    _small_base_cache(monkeypatch)
    lo = 10**12 - 300
    table = build_window(lo, lo + 300)
    for n in range(lo, lo + 301, 7):
        expected = oracle(n)
        assert table.at("liouville", n) == expected["liouville"], n
        assert table.at("spf", n) == expected["spf"], n
        assert table.at("tau", n) == expected["tau"], n


def test_sweep_never_sieves_densely_past_the_cache(monkeypatch):
    _small_base_cache(monkeypatch)
    requested = []
    real = arith_tables._eratosthenes

    def spy(n):
        requested.append(n)
        return real(n)

    monkeypatch.setattr(arith_tables, "_eratosthenes", spy)
    monkeypatch.setattr(arith_tables, "_base_limit", 1)
    monkeypatch.setattr(arith_tables, "_base_cache", np.zeros(0, dtype=np.int64))
    arith_tables.primes_up_to.cache_clear()
    build_window(10**10, 10**10 + 100)
    assert all(n <= 1024 for n in requested)


def test_smooth_rough_split_and_landreau():
    assert smooth_rough_split(2 * 3 * 3 * 101, 10) == (18, 101)
    rough, parts = landreau_factor(2**3 * 3**2 * 5 * 7 * 1009, y=40, z=10)
    assert rough == 1009
    assert math.prod(parts) == 2**3 * 3**2 * 5 * 7
    assert all(part <= 40 for part in parts)
    assert all(part > 4 for part in parts[:-1])
    with pytest.raises(InvalidThresholdsError):
        landreau_factor(100, y=5, z=10)


def test_divisors_and_mobius():
    assert divisors_up_to(60, 10) == [1, 2, 3, 4, 5, 6, 10]
    assert [mobius(n) for n in (1, 2, 4, 6, 30)] == [1, -1, 0, 1, -1]


def test_mertens_constants():
    reciprocal, product = mertens_diagnostics(10**6)
    assert reciprocal == pytest.approx(0.2614972, abs=5e-3)
    assert product == pytest.approx(math.exp(-np.euler_gamma), abs=5e-3)


def test_type_i_coeffs_evaluate_and_window_agree():
    chi = QuadChar(-3)
    coeffs = TypeICoeffs(cutoff=10, entries={1: 1.0, 2: -0.5, 7: 0.25}, twist="chi-cofactor")
    window = coeffs.window(1, 200, chi)
    for n in (1, 14, 28, 97, 140):
        assert window[n - 1] == pytest.approx(coeffs.evaluate(n, chi))
    assert coeffs.l1_norm() == pytest.approx(1.0 + 0.25 + 0.25 / 7)
    with pytest.raises(PreconditionError):
        coeffs.evaluate(5)
    with pytest.raises(PreconditionError):
        TypeICoeffs(cutoff=3, entries={4: 1.0})

"""
Acceptance suite for the Siegel lab.

Runs every pinned property check (sieves, singular series, desk-scale
correlations, exact identities, the Selberg majorant, quadrature,
exponential sums, L(1, chi) and the chain evaluator) and prints a summary.
Use ``siegel-lab selftest --quick`` for reduced scales.
"""

from __future__ import annotations

import math
import sys
import traceback
from dataclasses import dataclass

import numpy as np
from sympy import divisors, factorint, totient

from .approximants import (
    ApproximantBank,
    chi_log_window,
    lambda_agreement_predicate,
    lambda_flat_coeffs,
    lambda_sharp_coeffs,
    lambda_siegel_window,
    liouville_error_diagnostic,
    sharp_kernel,
    siegel_params,
)
from .arith_tables import build_window, dirichlet_window, mertens_diagnostics
from .correlations import chain_report, correlate_named, singular_series
from .exp_sums import (
    PeriodicWeight,
    estermann_max_ratio,
    hyperbola_bound,
    hyperbola_fourier_matrix,
    kloosterman,
    mfe_decompose,
)
from .quad_char import QuadChar, fundamental_discriminants, l_one, quality_proxy
from .schemas import ShiftSystem
from .selberg import SieveNu, majorant_check, nu_direct, nu_weights
from .smoothing import fourier_checks, log_identity_residual

TWIN_PRIME_SERIES = 1.32032363169373914785
MERTENS_B1 = 0.2614972128476428
EXP_MINUS_GAMMA = math.exp(-np.euler_gamma)

# (delta, R, D) for the exact split identities
IDENTITY_TRIPLES = ((-4, 30.0, 10.0), (-4, 100.0, 50.0), (-3, 30.0, 4.0))
IDENTITY_QUAD_TOL = 1e-11


@dataclass(frozen=True)
class Scales:
    sieve_limit: int
    chebyshev_limit: int
    series_cutoffs: tuple[int, int]
    series_tol: float
    correlation_x: int
    hl_tol: float
    identity_limit: int
    identity_samples: int
    majorant_limit: int
    nu_samples: int
    estermann_max_q: int
    chain_x: int
    chain_threads: tuple[int, int]


FULL = Scales(
    sieve_limit=10**5,
    chebyshev_limit=10**4,
    series_cutoffs=(10**6, 10**7),
    series_tol=1e-8,
    correlation_x=10**7,
    hl_tol=0.07,
    identity_limit=10**5,
    identity_samples=40,
    majorant_limit=10**6,
    nu_samples=1000,
    estermann_max_q=200,
    chain_x=10**6,
    chain_threads=(1, 8),
)

QUICK = Scales(
    sieve_limit=2 * 10**4,
    chebyshev_limit=10**4,
    series_cutoffs=(10**5, 10**6),
    series_tol=2e-7,
    correlation_x=10**6,
    hl_tol=0.1,
    identity_limit=10**4,
    identity_samples=10,
    majorant_limit=10**5,
    nu_samples=200,
    estermann_max_q=60,
    chain_x=10**5,
    chain_threads=(1, 4),
)


def _oracle(n: int) -> tuple[int, float, int, int]:
    """(lambda, Lambda, mu, tau) of n by trial factorisation."""
    f = factorint(n)
    lam = -1 if sum(f.values()) % 2 else 1
    mangoldt = math.log(next(iter(f))) if len(f) == 1 else 0.0
    mu = 0 if any(e > 1 for e in f.values()) else (-1) ** len(f)
    tau = math.prod(e + 1 for e in f.values())
    return lam, mangoldt, mu, tau


def class_number_l_one(delta: int) -> float:
    """L(1, chi_delta) from the class number formula.

    For delta < 0 the class number is counted over reduced primitive forms
    (a, b, c) with |b| <= a <= c; for delta > 0 the real log-sine form of
    the formula is used.
    """
    if delta > 0:
        chi = QuadChar(delta)
        terms = [chi(a) * math.log(math.sin(math.pi * a / delta)) for a in range(1, delta) if chi(a)]
        return -math.fsum(terms) / math.sqrt(delta)
    d = -delta
    h = 0
    a = 1
    while 3 * a * a <= d:
        for b in range(-a + 1, a + 1):
            if (b * b + d) % (4 * a):
                continue
            c = (b * b + d) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if math.gcd(math.gcd(a, abs(b)), c) == 1:
                h += 1
        a += 1
    w = {3: 6, 4: 4}.get(d, 2)
    return 2 * math.pi * h / (w * math.sqrt(d))


def test_sieves(scales: Scales) -> bool:
    """Sieved windows against trial factorisation"""
    print("\n🔍 Testing sieves...")
    n_max = scales.sieve_limit
    table = build_window(1, n_max)
    for n in range(1, n_max + 1):
        lam, mangoldt, mu, tau = _oracle(n)
        i = n - 1
        if (
            table.liouville[i] != lam
            or table.mu[i] != mu
            or table.tau[i] != tau
            or abs(table.mangoldt[i] - mangoldt) > 1e-12
        ):
            print(f"  ❌ Mismatch at n={n}")
            return False
    print(f"  ✅ liouville, mangoldt, mu, tau agree for n <= {n_max}")

    lo = 10**12
    far = build_window(lo, lo + 2000)
    for n in range(lo, lo + 2001):
        f = factorint(n)
        if far.spf[n - lo] != min(f) or far.liouville[n - lo] != _oracle(n)[0]:
            print(f"  ❌ Offset window mismatch at n={n}")
            return False
    print("  ✅ Offset window near 1e12 agrees")

    limit = scales.chebyshev_limit
    small = build_window(1, limit)
    chebyshev = dirichlet_window(
        lambda m: small.mangoldt[m - 1], lambda m: np.ones(m.shape), 1, limit
    )
    residual = float(np.max(np.abs(chebyshev - np.log(np.arange(1, limit + 1)))))
    if residual > 1e-9:
        print(f"  ❌ Chebyshev identity residual {residual:.3g}")
        return False
    print(f"  ✅ sum_(d|n) Lambda(d) = log n for n <= {limit} (residual {residual:.2g})")

    reciprocal, product = mertens_diagnostics(10**6)
    if abs(reciprocal - MERTENS_B1) > 5e-3 or abs(product - EXP_MINUS_GAMMA) > 5e-3:
        print(f"  ❌ Mertens diagnostics off: {reciprocal:.6f}, {product:.6f}")
        return False
    print("  ✅ Mertens constants")
    return True


def test_singular_series(scales: Scales) -> bool:
    """Twin prime series with overlapping tail enclosures"""
    print("\n📐 Testing singular series...")
    low, high = (singular_series([0, 2], cutoff) for cutoff in scales.series_cutoffs)
    for s in (low, high):
        if not s.lower <= TWIN_PRIME_SERIES <= s.upper:
            print(f"  ❌ Enclosure [{s.lower:.12f}, {s.upper:.12f}] misses the twin prime constant")
            return False
    if abs(high.value - TWIN_PRIME_SERIES) > scales.series_tol:
        print(f"  ❌ S(0,2) = {high.value:.12f}")
        return False
    if max(low.lower, high.lower) > min(low.upper, high.upper):
        print("  ❌ Enclosures at the two cutoffs do not overlap")
        return False
    print(f"  ✅ S(0,2) = {high.value:.12f} ± {high.upper - high.value:.2g}")
    if singular_series([0, 1], 100).value != 0.0:
        print("  ❌ Inadmissible tuple {0,1} should give 0")
        return False
    print("  ✅ Inadmissible tuple vanishes")
    return True


def test_correlations(scales: Scales) -> bool:
    """Hardy-Littlewood and Chowla at desk scale"""
    print("\n📈 Testing desk-scale correlations...")
    x = scales.correlation_x
    bank = ApproximantBank()
    series = singular_series([0, 2], 10**6).value
    twins = correlate_named(x, [("mangoldt", 0), ("mangoldt", 2)], bank)
    if abs(twins - series) > scales.hl_tol * series:
        print(f"  ❌ E Lambda(n)Lambda(n+2) = {twins:.6f} vs S = {series:.6f}")
        return False
    print(f"  ✅ E Lambda(n)Lambda(n+2) = {twins:.6f} at x={x:.0e} (S = {series:.6f})")
    chowla = correlate_named(x, [("lambda", 0), ("lambda", 1)], bank)
    if abs(chowla) > 0.02:
        print(f"  ❌ E lambda(n)lambda(n+1) = {chowla:.6f}")
        return False
    print(f"  ✅ E lambda(n)lambda(n+1) = {chowla:.6f}")
    return True


def test_exact_identities(scales: Scales) -> bool:
    """Sharp/flat splits and the Liouville agreement predicate"""
    print("\n🧮 Testing exact identities...")
    limit = scales.identity_limit
    rng = np.random.default_rng(20240101)
    liouville = build_window(1, limit).liouville.astype(np.float64)
    for delta, R, D in IDENTITY_TRIPLES:
        chi = QuadChar(delta)
        label = f"delta={delta}, R={R:g}, D={D:g}"
        sharp = lambda_sharp_coeffs(R, D, chi).window(1, limit, chi)
        flat = lambda_flat_coeffs(R, D, chi, limit).window(1, limit, chi)
        model = lambda_siegel_window(1, limit, R, chi)
        gap = float(np.max(np.abs(sharp + flat - model)))
        if gap > 1e-9:
            print(f"  ❌ lambda split off by {gap:.3g} ({label})")
            return False
        print(f"  ✅ lambda_sharp + lambda_flat = lambda_siegel ({label})")

        mismatched = np.flatnonzero(liouville != model) + 1
        if any(lambda_agreement_predicate(int(n), R, chi) for n in mismatched):
            print(f"  ❌ Agreement predicate holds at a mismatch ({label})")
            return False
        report = liouville_error_diagnostic(limit, limit, R, chi)
        if report.uncovered:
            print(f"  ❌ {report.uncovered} uncovered Liouville mismatches ({label})")
            return False
        print(f"  ✅ {mismatched.size} Liouville mismatches, all explained ({label})")

        params = siegel_params(limit, 1, 0, 0.5, quality_proxy(chi, 50.0), R=R, D=D, R0=R)
        kernel = sharp_kernel(params, chi, IDENTITY_QUAD_TOL)
        nu = SieveNu(R).window(1, limit)
        sharp_log = kernel.window(1, limit)
        flat_log = kernel.flat_window(1, limit)
        gap = float(np.max(np.abs(sharp_log * nu + flat_log * nu - chi_log_window(1, limit, chi) * nu)))
        if gap > 1e-9:
            print(f"  ❌ Lambda split off by {gap:.3g} ({label})")
            return False
        print(f"  ✅ Lambda_sharp + Lambda_flat = Lambda_siegel for all n <= {limit} ({label})")

        sample = sorted({1, 2, limit, *rng.integers(1, limit + 1, scales.identity_samples).tolist()})
        for n in sample:
            value = kernel.evaluate(n)
            if abs(sharp_log[n - 1] - value) > 1e-9:
                print(f"  ❌ Windowed sharp part differs at n={n}")
                return False
            if abs(flat_log[n - 1] - kernel.flat_direct(n)) > 1e-8:
                print(f"  ❌ Windowed flat part differs from its direct integral at n={n}")
                return False
            if abs(kernel.via_integrals(n) - value) > 1e-6:
                print(f"  ❌ Sharp part disagrees with its integral form at n={n}")
                return False
        print(f"  ✅ Sharp and flat routes agree on {len(sample)} sampled n ({label})")
    return True


def test_majorant(scales: Scales) -> bool:
    """Selberg majorant and its weight expansion"""
    print("\n🪜 Testing Selberg majorant...")
    table = build_window(1, scales.majorant_limit)
    rng = np.random.default_rng(7)
    for R in (30.0, 100.0, 500.0):
        violations = majorant_check(table, R)
        if violations:
            print(f"  ❌ {violations} violations at R={R:g}")
            return False
        weights = nu_weights(R)
        sample = rng.integers(1, scales.majorant_limit + 1, scales.nu_samples).tolist()
        worst = max(abs(weights.evaluate(n) - nu_direct(n, R)) for n in sample)
        if worst > 1e-10:
            print(f"  ❌ nu_weights differs from nu_direct by {worst:.3g} at R={R:g}")
            return False
        print(f"  ✅ R={R:g}: no violations, weights agree (max gap {worst:.2g})")
    return True


def test_quadrature(scales: Scales) -> bool:
    """Smooth partition identities"""
    print("\n∫  Testing quadrature...")
    for n in (1, 97, 10**6):
        residual = log_identity_residual(n)
        if residual > 1e-8:
            print(f"  ❌ log identity residual {residual:.3g} at n={n}")
            return False
    print("  ✅ log identity for n in {1, 97, 1e6}")
    first, second = fourier_checks()
    if first > 1e-6 or second > 1e-6:
        print(f"  ❌ Fourier checks {first:.3g}, {second:.3g}")
        return False
    print("  ✅ Fourier checks")
    return True


def _mfe_grid() -> list[tuple[int, int, int]]:
    grid = []
    for q in (6, 8, 9, 10, 12, 15, 18, 20, 24, 27, 30, 36):
        for q0 in divisors(q):
            if q0 == q or q0 > 12:
                continue
            for a in (1, 2, 3, 4, 5, 6):
                if q0 % math.gcd(a, q) == 0:
                    grid.append((q, a, q0))
    return grid


def test_exp_sums(scales: Scales) -> bool:
    """Kloosterman bounds, the hyperbola decomposition and its bound"""
    print("\n🌀 Testing exponential sums...")
    worst = max(estermann_max_ratio(q) for q in range(1, scales.estermann_max_q + 1))
    if worst > 1.0 + 1e-9:
        print(f"  ❌ Estermann ratio {worst:.6f} > 1")
        return False
    print(f"  ✅ Estermann bound for q <= {scales.estermann_max_q} (max ratio {worst:.4f})")

    q1, q2 = 7, 9
    for u1, u2 in ((1, 1), (3, 5), (0, 4)):
        direct = kloosterman(u1, u2, q1 * q2)
        inv2, inv1 = pow(q2, -1, q1), pow(q1, -1, q2)
        split = kloosterman(u1 * inv2, u2 * inv2, q1) * kloosterman(u1 * inv1, u2 * inv1, q2)
        if abs(direct - split) > 1e-9:
            print(f"  ❌ Twisted multiplicativity fails at ({u1}, {u2})")
            return False
    print("  ✅ Twisted multiplicativity mod 63")

    grid = _mfe_grid()
    rng = np.random.default_rng(11)
    for q, a, q0 in grid:
        f = PeriodicWeight.random(q0, rng)
        mfe = mfe_decompose(q, a, q0, f)
        if mfe.identity_residual > 1e-9 or mfe.excluded_max > 1e-9 or mfe.max_bound_ratio() > 1.0:
            print(f"  ❌ Decomposition fails at q={q}, a={a}, q0={q0}")
            return False
        coeffs = np.abs(hyperbola_fourier_matrix(q, a, q0, f))
        for u1 in range(q):
            for u2 in range(q):
                if coeffs[u1, u2] > hyperbola_bound(q, q0, u1, u2) * (1 + 1e-9):
                    print(f"  ❌ Hyperbola bound fails at q={q}, a={a}, q0={q0}, u=({u1}, {u2})")
                    return False
    print(f"  ✅ Decomposition and hyperbola bound on {len(grid)} configurations")
    if abs(kloosterman(0, 0, 30) - int(totient(30))) > 1e-9:
        print("  ❌ S(0, 0; 30) != phi(30)")
        return False
    return True


def test_l_functions(scales: Scales) -> bool:
    """L(1, chi) against the class number formula"""
    print("\n🔢 Testing L(1, chi)...")
    worst = 0.0
    discriminants = fundamental_discriminants(200)
    for delta in discriminants:
        gap = abs(l_one(QuadChar(delta)) - class_number_l_one(delta))
        worst = max(worst, gap)
        if gap > 1e-6:
            print(f"  ❌ delta={delta}: gap {gap:.3g}")
            return False
    print(f"  ✅ {len(discriminants)} discriminants, max gap {worst:.2g}")
    return True


def test_chain(scales: Scales) -> bool:
    """Chain evaluator determinism"""
    print("\n⛓️  Testing chain evaluator...")
    chi = QuadChar(-163)
    params = siegel_params(scales.chain_x, 2, 0, 0.5, quality_proxy(chi, 50.0), R=200.0, D=1000.0)
    shifts = ShiftSystem(h=[0, 2])
    window_size = 2**16
    reports = []
    for threads in (scales.chain_threads[0], *scales.chain_threads):
        report = chain_report(params, shifts, chi, threads=threads, window_size=window_size)
        if not all(math.isfinite(v) for v in report.lines):
            print(f"  ❌ Non-finite line with {threads} threads")
            return False
        reports.append(report)
    raw = correlate_named(
        params.x, [("mangoldt", 0), ("mangoldt", 2)], ApproximantBank(), window_size=window_size, threads=1
    )
    if reports[0].lines[0] != raw:
        print(f"  ❌ Line (i) {reports[0].lines[0]!r} differs from the raw correlation {raw!r}")
        return False
    if len({r.model_dump_json() for r in reports}) != 1:
        print("  ❌ Reports differ across runs or thread counts")
        return False
    print(f"  ✅ Five finite lines, identical JSON across threads {scales.chain_threads}")
    return True


def run_all_tests(quick: bool = False) -> bool:
    """Run all tests and provide summary"""
    scales = QUICK if quick else FULL
    print("🧪 Siegel Lab - Acceptance Suite" + (" (quick)" if quick else ""))
    print("=" * 50)

    tests = [
        ("Sieve Tests", test_sieves),
        ("Singular Series Tests", test_singular_series),
        ("Correlation Tests", test_correlations),
        ("Exact Identity Tests", test_exact_identities),
        ("Selberg Majorant Tests", test_majorant),
        ("Quadrature Tests", test_quadrature),
        ("Exponential Sum Tests", test_exp_sums),
        ("L-function Tests", test_l_functions),
        ("Chain Evaluator Tests", test_chain),
    ]

    results = []

    for test_name, test_func in tests:
        try:
            result = test_func(scales)
            results.append((test_name, result))
        except Exception as e:
            print(f"\n❌ {test_name} failed with exception: {e}")
            traceback.print_exc()
            results.append((test_name, False))

    print("\n" + "=" * 50)
    print("📋 Test Summary:")

    passed = 0
    total = len(results)

    for test_name, result in results:
        status = "✅ PASS" if result else "❌ FAIL"
        print(f"  {status}: {test_name}")
        if result:
            passed += 1

    print(f"\n📊 Results: {passed}/{total} tests passed")

    if passed == total:
        print("🎉 All tests passed!")
    else:
        print("⚠️  Some tests failed. Please check the errors above.")

    return passed == total


if __name__ == "__main__":
    sys.exit(0 if run_all_tests(quick="--quick" in sys.argv) else 1)

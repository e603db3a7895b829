"""
Shifted correlation averages and the five-line chain evaluator.

Averages E_{n<=x} prod_j f_j(n + h_j) are computed window by window: every
distinct function is evaluated once per window over the shifted span, the
per-window partial is an exactly rounded sum, and partials are reduced in
ascending window order so results do not depend on the thread count.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Any

import numpy as np
from sympy.ntheory.modular import solve_congruence

from .approximants import ApproximantBank, WindowFn, chi_log_window, sharp_kernel
from .arith_tables import iter_windows, primes_up_to
from .config import get_settings
from .errors import CutoffTooSmallError, EvaluationError, PreconditionError
from .quad_char import QuadChar
from .schemas import (
    ChainGap,
    ChainReport,
    LDScanResult,
    ShiftSystem,
    SiegelParams,
    SingularSeries,
)
from .smoothing import cutoff_fingerprint

logger = logging.getLogger(__name__)

# sum_{p > P} 1/p^2 <= PRIME_RECIPROCAL_SQUARE_TAIL / (P log P) for P >= 2
PRIME_RECIPROCAL_SQUARE_TAIL = 2.51

LINE_LABELS = (
    "Lambda . lambda",
    "Lambda . lambda_siegel",
    "Lambda_siegel . lambda_siegel",
    "Lambda_siegel . lambda_sharp",
    "Lambda_sharp . lambda_sharp",
)
LINE_HANDLES = (
    ("mangoldt", "lambda"),
    ("mangoldt", "lambda_siegel"),
    ("Lambda_siegel", "lambda_siegel"),
    ("Lambda_siegel", "lambda_sharp"),
    ("Lambda_sharp", "lambda_sharp"),
)


def _software_version() -> str:
    from . import __version__

    return __version__


# ---------------------------------------------------------------------------
# Singular series
# ---------------------------------------------------------------------------


def beta_p(h: Sequence[int], p: int) -> Fraction:
    """(1 - 1/p)^{-k} (1 - |h mod p| / p), exactly."""
    k = len(h)
    residues = len({v % p for v in h})
    return Fraction(p, p - 1) ** k * (1 - Fraction(residues, p))


def singular_series(h: Sequence[int], prime_cutoff: int) -> SingularSeries:
    """Euler product over p <= prime_cutoff with a certified tail enclosure.

    For p > max(k, max|h_i - h_j|) the residues are distinct and
    0 <= -log beta_p <= C / p^2 with C = (k^2 / (1 - k/P) - k) / 2, P the
    cutoff. The omitted factors therefore multiply the product by a number in
    [exp(-tau), exp(tau)] with tau = C * 2.51 / (P log P).
    """
    h = list(h)
    k = len(h)
    spread = max(h) - min(h) if h else 0
    need = max(max(h, default=0) + 2, k + 1)
    if prime_cutoff < need:
        raise CutoffTooSmallError(f"prime cutoff {prime_cutoff} below the required {need}")
    if k == 0:
        return SingularSeries(value=1.0, tail=0.0, lower=1.0, upper=1.0, prime_cutoff=prime_cutoff)

    primes = primes_up_to(prime_cutoff)
    small = primes[primes <= max(spread, k)].tolist()
    large = primes[primes > max(spread, k)].astype(np.float64)

    exact = Fraction(1)
    for p in small:
        exact *= beta_p(h, p)
    if exact == 0:
        return SingularSeries(value=0.0, tail=0.0, lower=0.0, upper=0.0, prime_cutoff=prime_cutoff)

    logs = -k * np.log1p(-1.0 / large) + np.log1p(-k / large)
    value = float(exact) * math.exp(math.fsum(logs.tolist()))
    P = float(prime_cutoff)
    constant = 0.5 * (k * k / (1.0 - k / P) - k)
    tail = constant * PRIME_RECIPROCAL_SQUARE_TAIL / (P * math.log(P))
    return SingularSeries(
        value=value,
        tail=tail,
        lower=value * math.exp(-tail),
        upper=value * math.exp(tail),
        prime_cutoff=prime_cutoff,
    )


def crt_merge(pairs: Sequence[tuple[int, int]]) -> tuple[int, int] | None:
    """The class a mod lcm(d_j) with a = -h_j mod d_j for all (d_j, h_j), or None."""
    if any(d < 1 for d, _ in pairs):
        raise PreconditionError("moduli must be positive")
    if not pairs:
        return 0, 1
    solved = solve_congruence(*[(-h % d, d) for d, h in pairs])
    if solved is None:
        return None
    a, modulus = solved
    return int(a), int(modulus)


# ---------------------------------------------------------------------------
# Correlations
# ---------------------------------------------------------------------------


def _window_partial(
    a: int,
    b: int,
    factors: Sequence[tuple[WindowFn, int]],
    lo_shift: int,
    hi_shift: int,
) -> float:
    values: dict[int, np.ndarray] = {}
    for fn, _ in factors:
        if id(fn) not in values:
            values[id(fn)] = np.asarray(fn(a + lo_shift, b + hi_shift), dtype=np.float64)
    product = np.ones(b - a + 1, dtype=np.float64)
    for fn, shift in factors:
        offset = shift - lo_shift
        product *= values[id(fn)][offset : offset + b - a + 1]
    bad = np.flatnonzero(~np.isfinite(product))
    if bad.size:
        raise EvaluationError("non-finite correlation summand", n=a + int(bad[0]))
    chunks = (product[i : i + 65536].tolist() for i in range(0, product.size, 65536))
    return math.fsum(itertools.chain.from_iterable(chunks))


def correlate(
    x: int,
    factors: Sequence[tuple[WindowFn, int]],
    window_size: int | None = None,
    threads: int | None = None,
) -> float:
    """(1/floor(x)) sum_{n <= x} prod_j f_j(n + h_j).

    Args:
        x: Upper end of the average
        factors: (window function, shift) pairs; an empty list gives 1
        window_size: Entries per window (default: settings)
        threads: Worker threads; the result does not depend on it

    Returns:
        The average, summed per window with math.fsum in window order.
    """
    if x < 1:
        raise PreconditionError(f"x must be positive, got {x}")
    if any(shift < 0 for _, shift in factors):
        raise PreconditionError("shifts must be nonnegative")
    settings = get_settings()
    window_size = window_size or settings.SIEGEL_LAB_WINDOW_SIZE
    threads = threads or settings.SIEGEL_LAB_THREADS
    if not factors:
        return 1.0
    lo_shift = min(s for _, s in factors)
    hi_shift = max(s for _, s in factors)
    span = window_size - (hi_shift - lo_shift)
    if span < 1:
        raise PreconditionError(f"window size {window_size} cannot hold shift spread {hi_shift - lo_shift}")
    windows = list(iter_windows(1, x, span))
    logger.debug("correlate x=%d over %d windows with %d threads", x, len(windows), threads)

    def run(window: tuple[int, int]) -> float:
        return _window_partial(window[0], window[1], factors, lo_shift, hi_shift)

    if threads == 1 or len(windows) == 1:
        partials = [run(w) for w in windows]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(run, windows))
    return math.fsum(partials) / x


def parse_factor(spec: str) -> tuple[str, int]:
    """'name:shift' -> (name, shift)."""
    name, _, shift = spec.partition(":")
    return name.strip(), int(shift)


def correlate_named(
    x: int,
    factors: Sequence[tuple[str, int]],
    bank: ApproximantBank,
    window_size: int | None = None,
    threads: int | None = None,
) -> float:
    return correlate(x, [(bank.handle(name), shift) for name, shift in factors], window_size, threads)


# ---------------------------------------------------------------------------
# Chain evaluator
# ---------------------------------------------------------------------------


def _gap(step: str, a: float, b: float, scale: float) -> ChainGap:
    absolute = abs(a - b)
    return ChainGap(step=step, absolute=absolute, relative=absolute / abs(scale) if scale else None)


def chain_report(
    params: SiegelParams,
    shifts: ShiftSystem,
    chi: QuadChar,
    series_cutoff: int = 10**6,
    window_size: int | None = None,
    threads: int | None = None,
    quad_tol: float | None = None,
    config: dict[str, Any] | None = None,
    bank: ApproximantBank | None = None,
) -> ChainReport:
    """Evaluate the five correlation lines at x = params.x and the singular series.

    Args:
        params: Scales x, R, D, R0 with their provenance
        shifts: h for the von Mangoldt-type factors, h' for the Liouville-type ones
        chi: The quadratic character
        series_cutoff: Prime cutoff of the singular series
        window_size: Entries per window (default: settings)
        threads: Worker threads (default: settings)
        quad_tol: Absolute tolerance for the t-quadratures
        config: Run configuration echoed into the report
        bank: Shared handle cache; one is built from chi and params if omitted

    Returns:
        A ChainReport with the lines, the gaps between consecutive lines and
        the singular series (zero whenever Liouville factors are present).
    """
    if shifts.k > 2:
        raise PreconditionError(f"the chain evaluator needs k <= 2, got k={shifts.k}")
    bank = bank or ApproximantBank(chi=chi, params=params, quad_tol=quad_tol)
    x = params.x
    kernel = sharp_kernel(params, chi, quad_tol)
    timings: dict[str, float] = {}
    lines: list[float] = []
    for label, (big, small) in zip(LINE_LABELS, LINE_HANDLES):
        started = time.perf_counter()
        factors = [(big, h) for h in shifts.h] + [(small, h) for h in shifts.h_prime]
        lines.append(correlate_named(x, factors, bank, window_size, threads))
        timings[label] = time.perf_counter() - started
        logger.info("line %-32s = %.12g (%.2fs)", label, lines[-1], timings[label])

    if shifts.ell > 0:
        series = SingularSeries(value=0.0, tail=0.0, lower=0.0, upper=0.0, prime_cutoff=series_cutoff)
    else:
        started = time.perf_counter()
        series = singular_series(shifts.h, series_cutoff)
        timings["singular_series"] = time.perf_counter() - started

    steps = ("i", "ii", "iii", "iv", "v")
    targets = [*lines[1:], series.value]
    gaps = [_gap(step, a, b, lines[0]) for step, a, b in zip(steps, lines, targets)]
    return ChainReport(
        software_version=_software_version(),
        delta=chi.delta,
        x=x,
        params=params,
        shifts=shifts,
        line_labels=list(LINE_LABELS),
        lines=lines,
        singular_series=series,
        gaps=gaps,
        middle_window_empty=kernel.middle_window_empty,
        cutoff_fingerprint=cutoff_fingerprint(),
        eta=params.eta,
        config=config,
        timings=timings,
    )


def sweep(
    xs: Sequence[int],
    build_params: Callable[[int], SiegelParams],
    shifts: ShiftSystem,
    chi: QuadChar,
    **kwargs: Any,
) -> list[ChainReport]:
    """chain_report at each x, in the given order."""
    reports = []
    for i, x in enumerate(xs, start=1):
        logger.info("sweep %d/%d: x=%d", i, len(xs), x)
        reports.append(chain_report(build_params(x), shifts, chi, **kwargs))
    return reports


def chain_rows(reports: Sequence[ChainReport]) -> list[dict[str, Any]]:
    """One CSV row per report."""
    rows = []
    for report in reports:
        row: dict[str, Any] = {
            "x": report.x,
            "delta": report.delta,
            "R": report.params.R.value,
            "D": report.params.D.value,
        }
        for i, value in enumerate(report.lines, start=1):
            row[f"line_{i}"] = value
        row["singular_series"] = report.singular_series.value
        row["series_tail"] = report.singular_series.tail
        for gap in report.gaps:
            row[f"gap_{gap.step}"] = gap.absolute
        row["middle_window_empty"] = report.middle_window_empty
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Residue-class sums of the flat part
# ---------------------------------------------------------------------------


def level_of_distribution_scan(
    params: SiegelParams,
    chi: QuadChar,
    q: int,
    a: int,
    lo: int,
    hi: int,
    weights: Sequence[float] | None = None,
    quad_tol: float | None = None,
    config: dict[str, Any] | None = None,
) -> LDScanResult:
    """sum_{n in [lo, hi], n = a (q)} (chi*log)^flat(n) f((n - a)/q), f a q_chi-periodic table.

    Args:
        params: Scales; x bounds q and the interval lies in [1, 2x]
        chi: The quadratic character
        q: Modulus in [1, x]
        a: Residue class
        lo: First n
        hi: Last n
        weights: q_chi values of f in [-1, 1]; None means f = 1
        quad_tol: Absolute tolerance for the kernel quadratures
        config: Run configuration echoed into the result

    Returns:
        An LDScanResult with the sum, the term count and the ratio to the
        trivial bound (x/q) max |summand|.
    """
    x = params.x
    if not 1 <= q <= x:
        raise PreconditionError(f"need 1 <= q <= x, got q={q}")
    if not 1 <= lo <= hi <= 2 * x:
        raise PreconditionError(f"interval [{lo}, {hi}] must lie in [1, 2x]")
    period = chi.conductor
    table = np.ones(period) if weights is None else np.asarray(weights, dtype=np.float64)
    if table.shape != (period,):
        raise PreconditionError(f"weights must have length q_chi={period}")
    if np.any(np.abs(table) > 1.0):
        raise PreconditionError("weights must take values in [-1, 1]")

    kernel = sharp_kernel(params, chi, quad_tol)
    pieces: list[float] = []
    terms = 0
    largest = 0.0
    for wlo, whi in iter_windows(lo, hi, get_settings().SIEGEL_LAB_WINDOW_SIZE):
        ns = np.arange(wlo, whi + 1, dtype=np.int64)
        hit = (ns - a) % q == 0
        if not hit.any():
            continue
        flat = chi_log_window(wlo, whi, chi) - kernel.window(wlo, whi)
        selected = ns[hit]
        summands = flat[hit] * table[((selected - a) // q) % period]
        pieces.extend(summands.tolist())
        terms += int(selected.size)
        largest = max(largest, float(np.max(np.abs(summands))))
    value = math.fsum(pieces)
    trivial = x / q * largest
    return LDScanResult(
        software_version=_software_version(),
        params=params,
        eta=params.eta,
        delta=chi.delta,
        x=x,
        q=q,
        a=a,
        lo=lo,
        hi=hi,
        terms=terms,
        value=value,
        trivial_bound=trivial,
        ratio=value / trivial if trivial else None,
        weights=None if weights is None else table.tolist(),
        cutoff_fingerprint=cutoff_fingerprint(),
        config=config,
    )

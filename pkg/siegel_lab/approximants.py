"""
Siegel-model approximants and their Type I forms.

- lambda_siegel: the completely multiplicative function agreeing with the
  Liouville function on primes <= R and with chi on primes > R.
- lambda_sharp / lambda_flat: split of lambda_siegel by the smooth cutoff
  psi_{<=D} on the divisor variable.
- chi_log and its sharp/flat split, evaluated through the dyadic t-integral
  representation with all t-integrals truncated to [1/100, 100x].
- Lambda_siegel = chi_log * nu and Lambda_sharp = chi_log_sharp * nu.
"""

from __future__ import annotations

import logging
import math
import threading
from collections import OrderedDict
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from sympy import divisors, factorint

from .arith_tables import (
    ArithTable,
    TypeICoeffs,
    build_window,
    completely_multiplicative_window,
    dirichlet_window,
    primes_up_to,
)
from .config import get_settings
from .errors import EvaluationError, PreconditionError, TypeICutoffTooLargeError
from .quad_char import QuadChar
from .schemas import LiouvilleErrorReport, QualityProxy, ScaleValue, SiegelParams
from .selberg import SieveNu, nu_direct
from .smoothing import phi_t, psi_gt, psi_le, quad_log

logger = logging.getLogger(__name__)

WindowFn = Callable[[int, int], np.ndarray]

T_LOWER = 0.01
T_UPPER_FACTOR = 100.0
CHI_LOG_SLACK = 1e-9


# ---------------------------------------------------------------------------
# Scales
# ---------------------------------------------------------------------------


def _scale(name: str, override: float | None, formula: float, lo: float, hi: float) -> ScaleValue:
    if override is not None:
        if not lo <= override <= hi:
            raise PreconditionError(f"{name}={override} outside [{lo:g}, {hi:g}]")
        return ScaleValue(value=float(override), provenance="override")
    if lo <= formula <= hi:
        return ScaleValue(value=formula, provenance="formula")
    clamped = min(max(formula, lo), hi)
    logger.warning("%s = %.6g clamped to %.6g", name, formula, clamped)
    return ScaleValue(value=clamped, provenance="clamped")


def siegel_params(
    x: int,
    k: int,
    ell: int,
    eps0: float,
    eta: QualityProxy,
    R: float | None = None,
    D: float | None = None,
    R0: float | None = None,
) -> SiegelParams:
    """Scales R, D, R0 from their defining formulas, or explicit overrides.

    Formula values outside their admissible ranges are clamped to
    2 <= R <= x, 2 <= D <= x, 2 <= R0 <= R.
    """
    if x < 2:
        raise PreconditionError(f"x must be at least 2, got {x}")
    if not 0.0 < eps0 < 1.0:
        raise PreconditionError(f"eps0 must lie in (0, 1), got {eps0}")
    log_eta = math.log(eta.eta_hat)
    log_x = math.log(x)
    r_formula = math.exp(log_x / log_eta ** (1.0 / (5 * max(1, k))))
    d_formula = math.exp(log_x * eps0 / (10 * (k + ell))) if k + ell else float(x)
    r0_formula = math.exp(log_x / math.sqrt(log_eta))
    r_scale = _scale("R", R, r_formula, 2.0, float(x))
    d_scale = _scale("D", D, d_formula, 2.0, float(x))
    r0_scale = _scale("R0", R0, r0_formula, 2.0, r_scale.value)
    return SiegelParams(x=x, k=k, ell=ell, eps0=eps0, eta=eta, R=r_scale, D=d_scale, R0=r0_scale)


# ---------------------------------------------------------------------------
# lambda_siegel and its split
# ---------------------------------------------------------------------------


def lambda_siegel(n: int, R: float, chi: QuadChar) -> int:
    if n < 1:
        raise PreconditionError(f"n must be positive, got {n}")
    value = 1
    for p, e in factorint(n).items():
        local = -1 if p <= R else chi(p)
        value *= local**e
        if value == 0:
            return 0
    return value


def lambda_agreement_predicate(n: int, R: float, chi: QuadChar) -> bool:
    """True iff n has no prime factor p > R with chi(p) != -1."""
    if n < 1:
        raise PreconditionError(f"n must be positive, got {n}")
    return all(p <= R or chi(p) == -1 for p in factorint(n))


def lambda_siegel_window(lo: int, hi: int, R: float, chi: QuadChar) -> np.ndarray:
    return completely_multiplicative_window(
        lo, hi, lambda p: np.where(p <= R, -1.0, chi.values(p))
    )


def _smooth_local_values(R: float, limit: float, chi: QuadChar) -> dict[int, float]:
    """(lambda * mu chi)(d) over R-smooth d < limit.

    The local factor at p^j is (-1)^j (1 + chi(p)), which vanishes whenever
    chi(p) = -1, so only primes with chi(p) in {0, 1} are expanded.
    """
    top = math.ceil(limit) - 1
    primes = [p for p in primes_up_to(int(min(R, top))).tolist() if chi(p) != -1]
    values: dict[int, float] = {1: 1.0}
    stack: list[tuple[int, float, int]] = [(1, 1.0, 0)]
    while stack:
        d, value, start = stack.pop()
        for i in range(start, len(primes)):
            p = primes[i]
            if d * p > top:
                break
            local = 1.0 + chi(p)
            pk, sign = p, -1.0
            while d * pk <= top:
                entry = value * sign * local
                values[d * pk] = entry
                stack.append((d * pk, entry, i + 1))
                pk *= p
                sign = -sign
    return values


def lambda_sharp_coeffs(
    R: float, D: float, chi: QuadChar, max_cutoff: int | None = None
) -> TypeICoeffs:
    """b_d = (lambda * mu chi)_{(<=R)}(d) psi_{<=D}(d), so lambda_sharp = sum_{d|n} b_d chi(n/d)."""
    bound = max_cutoff or get_settings().SIEGEL_LAB_MAX_TYPE_I_CUTOFF
    if D > bound:
        raise TypeICutoffTooLargeError(f"D={D:.6g} exceeds the configured bound {bound}")
    if D <= 1 or R <= 1:
        raise PreconditionError(f"need R, D > 1, got R={R}, D={D}")
    entries: dict[int, float] = {}
    for d, value in _smooth_local_values(R, D, chi).items():
        weighted = value * float(psi_le(D, d))
        if weighted != 0.0:
            entries[d] = weighted
    return TypeICoeffs(cutoff=D, entries=entries, twist="chi-cofactor")


@lru_cache(maxsize=8)
def _sharp_coeffs_cached(R: float, D: float, chi: QuadChar) -> TypeICoeffs:
    return lambda_sharp_coeffs(R, D, chi)


def lambda_sharp(n: int, R: float, D: float, chi: QuadChar) -> float:
    return _sharp_coeffs_cached(R, D, chi).evaluate(n, chi)


def lambda_flat(n: int, params: SiegelParams, chi: QuadChar) -> float:
    R, D = params.R.value, params.D.value
    return lambda_siegel(n, R, chi) - lambda_sharp(n, R, D, chi)


def lambda_flat_coeffs(R: float, D: float, chi: QuadChar, limit: int) -> TypeICoeffs:
    """(lambda * mu chi)_{(<=R)}(d) psi_{>D}(d) for d <= limit, so lambda_flat(n) = sum_{d|n} c_d chi(n/d) for n <= limit."""
    bound = get_settings().SIEGEL_LAB_MAX_TYPE_I_CUTOFF
    if limit > bound:
        raise TypeICutoffTooLargeError(f"limit={limit} exceeds the configured bound {bound}")
    entries: dict[int, float] = {}
    for d, value in _smooth_local_values(R, limit + 1, chi).items():
        weighted = value * float(psi_gt(D, d))
        if weighted != 0.0:
            entries[d] = weighted
    return TypeICoeffs(cutoff=float(limit), entries=entries, twist="chi-cofactor")


def lambda_flat_direct(n: int, R: float, D: float, chi: QuadChar) -> float:
    """sum_{d | n} (lambda * mu chi)_{(<=R)}(d) psi_{>D}(d) chi(n/d), from the divisors of n."""
    if n < 1:
        raise PreconditionError(f"n must be positive, got {n}")
    terms = []
    for d in divisors(n):
        local = 1.0
        for p, e in factorint(d).items():
            if p > R:
                local = 0.0
                break
            local *= (-1.0) ** e * (1 + chi(p))
        if local:
            terms.append(local * float(psi_gt(D, d)) * chi(n // d))
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# chi * log and Lambda_siegel
# ---------------------------------------------------------------------------


def chi_log(n: int, chi: QuadChar) -> float:
    """sum_{d | n} chi(d) log(n/d)."""
    if n < 1:
        raise PreconditionError(f"n must be positive, got {n}")
    value = math.fsum(chi(d) * math.log(n // d) for d in divisors(n))
    if value < -CHI_LOG_SLACK:
        raise EvaluationError(f"chi*log is negative: {value:.3g}", n=n)
    return value


def chi_log_window(lo: int, hi: int, chi: QuadChar) -> np.ndarray:
    """chi*log on [lo, hi]; it equals sum_{m | n} Lambda(m) (1*chi)(n/m) and so is never negative."""
    values = dirichlet_window(chi.values, lambda m: np.log(m.astype(np.float64)), lo, hi)
    negative = np.flatnonzero(values < -CHI_LOG_SLACK)
    if negative.size:
        i = int(negative[0])
        raise EvaluationError(f"chi*log is negative: {values[i]:.3g}", n=lo + i)
    return values


def Lambda_siegel(n: int, R: float, chi: QuadChar) -> float:  # noqa: N802
    return chi_log(n, chi) * nu_direct(n, R)


# ---------------------------------------------------------------------------
# The sharp part of chi * log
# ---------------------------------------------------------------------------


@dataclass
class SharpKernel:
    """Psi and c_d for the sharp part of chi * log at scale T = D q^2.

    (chi*log)^sharp(n) = sum_{d | n} (Psi(n/d) chi(d) + c_d chi(n/d)) with
    Psi(y) = int_T^U w(t) Phi_t(y) log t dt/t and
    c_d = int_{1/100}^T Phi_t(d) log t dt/t + Phi_T(d) K, where
    w(t) = psi_{<=T^2}(x/t), K = int_T^U (1 - w(t)) log t dt/t and U = 100x.
    """

    x: int
    D: float
    chi: QuadChar
    quad_tol: float | None = None
    T: float = field(init=False)
    U: float = field(init=False)
    t_eff: float = field(init=False)
    tol: float = field(init=False)
    middle_window_empty: bool = field(init=False)

    def __post_init__(self) -> None:
        if self.x < 2 or self.D <= 1:
            raise PreconditionError(f"need x >= 2 and D > 1, got x={self.x}, D={self.D}")
        q = self.chi.conductor
        self.T = self.D * q * q
        self.U = T_UPPER_FACTOR * self.x
        self.t_eff = min(self.T, self.U)
        base_tol = self.quad_tol or get_settings().SIEGEL_LAB_QUAD_TOL
        self.tol = base_tol * max(1.0, math.log(self.x))
        self.middle_window_empty = self.T**3 >= self.x
        if self.middle_window_empty:
            logger.warning(
                "Middle t-window [%.6g, %.6g] is empty; the sharp part reduces to chi*log near x",
                self.T, self.x / self.T**2,
            )
        self._lock = threading.RLock()
        self._psi_memo: dict[int, float] = {}
        self._c_memo: dict[int, float] = {}
        self._k_value: float | None = None
        self._psi_table = np.zeros(1)
        self._c_table = np.zeros(1)
        self._flat_table = np.zeros(1)

    @property
    def _edges(self) -> tuple[float, float, float, float]:
        x, T = self.x, self.T
        return x / T**2, x / T, x * T, x * T**2

    def w(self, t: float) -> float:
        return float(psi_le(self.T**2, self.x / t))

    @property
    def K(self) -> float:  # noqa: N802
        with self._lock:
            if self._k_value is None:
                if self.T >= self.U:
                    self._k_value = 0.0
                else:
                    self._k_value = quad_log(
                        lambda t: (1.0 - self.w(t)) * math.log(t),
                        self.T, self.U, self.tol, breaks=self._edges,
                    )
            return self._k_value

    def c(self, d: int) -> float:
        if d <= self.t_eff / math.e:
            return math.log(d)
        if d >= math.e * self.t_eff:
            return 0.0
        with self._lock:
            if d not in self._c_memo:
                lo = max(T_LOWER, d / math.e)
                head = (
                    quad_log(lambda t: float(phi_t(t, d)) * math.log(t), lo, self.t_eff, self.tol, breaks=(d,))
                    if lo < self.t_eff
                    else 0.0
                )
                self._c_memo[d] = head + float(phi_t(self.T, d)) * self.K
            return self._c_memo[d]

    def _psi_shortcut(self, y: float) -> float | None:
        if self.T >= self.U:
            return 0.0
        a, b = max(self.T, y / math.e), min(self.U, y * math.e)
        if a >= b:
            return 0.0
        zero_below, one_lo, one_hi, zero_above = self._edges
        if b <= zero_below or a >= zero_above:
            return 0.0
        full = self.T <= y / math.e and y * math.e <= self.U
        if full and a >= one_lo and b <= one_hi:
            return math.log(y)
        return None

    def psi(self, y: float) -> float:
        quick = self._psi_shortcut(y)
        if quick is not None:
            return quick
        key = int(y) if float(y).is_integer() else None
        with self._lock:
            if key is not None and key in self._psi_memo:
                return self._psi_memo[key]
            a, b = max(self.T, y / math.e), min(self.U, y * math.e)
            value = quad_log(
                lambda t: self.w(t) * float(phi_t(t, y)) * math.log(t),
                a, b, self.tol, breaks=(y, *self._edges),
            )
            if key is not None:
                self._psi_memo[key] = value
            return value

    def evaluate(self, n: int) -> float:
        if n < 1:
            raise PreconditionError(f"n must be positive, got {n}")
        terms = []
        for d in divisors(n):
            terms.append(self.psi(n // d) * self.chi(d))
            terms.append(self.c(d) * self.chi(n // d))
        return math.fsum(terms)

    def via_integrals(self, n: int) -> float:
        """The three t-integrals with the divisor sums taken inside the integrands."""
        ds = divisors(n)
        chi = self.chi
        first_breaks = [t for d in ds for t in (d / math.e, d, d * math.e)]
        first = quad_log(
            lambda t: math.fsum(float(phi_t(t, d)) * chi(n // d) for d in ds) * math.log(t),
            T_LOWER, self.t_eff, self.tol, breaks=first_breaks,
        )
        if self.T >= self.U:
            return first
        second_breaks = [t for d in ds for t in (n / d / math.e, n / d, n / d * math.e)]
        second = quad_log(
            lambda t: self.w(t) * math.fsum(float(phi_t(t, n // d)) * chi(d) for d in ds) * math.log(t),
            self.T, self.U, self.tol, breaks=[*second_breaks, *self._edges],
        )
        third = self.K * math.fsum(float(phi_t(self.T, d)) * chi(n // d) for d in ds)
        return math.fsum([first, second, third])

    def flat_direct(self, n: int) -> float:
        """int_T^U (1 - w(t)) sum_{d | n} chi(d) (Phi_t - Phi_T)(n/d) log t dt/t."""
        if self.T >= self.U:
            return 0.0
        ds = divisors(n)
        chi = self.chi
        breaks = [t for d in ds for t in (n / d / math.e, n / d, n / d * math.e)]

        def integrand(t: float) -> float:
            inner = math.fsum(
                chi(d) * (float(phi_t(t, n // d)) - float(phi_t(self.T, n // d))) for d in ds
            )
            return (1.0 - self.w(t)) * inner * math.log(t)

        return quad_log(integrand, self.T, self.U, self.tol, breaks=[*breaks, *self._edges])

    def psi_table(self, limit: int) -> np.ndarray:
        """Psi(y) for y = 0..limit (index 0 unused)."""
        with self._lock:
            if self._psi_table.size > limit:
                return self._psi_table[: limit + 1]
            table = np.zeros(limit + 1, dtype=np.float64)
            if self.T < self.U:
                ys = np.arange(limit + 1, dtype=np.float64)
                a = np.maximum(self.T, ys / math.e)
                b = np.minimum(self.U, ys * math.e)
                zero_below, one_lo, one_hi, zero_above = self._edges
                zero = (a >= b) | (b <= zero_below) | (a >= zero_above)
                full = (self.T <= ys / math.e) & (ys * math.e <= self.U)
                one = ~zero & full & (a >= one_lo) & (b <= one_hi)
                one[0] = False
                table[one] = np.log(ys[one])
                pending = np.flatnonzero(~zero & ~one)
                for y in pending[pending >= 1].tolist():
                    table[y] = self.psi(y)
                logger.debug("Psi table to %d: %d quadratures", limit, pending.size)
            self._psi_table = table
            return table

    def c_table(self, limit: int) -> np.ndarray:
        """c_d for d = 0..limit (index 0 unused)."""
        with self._lock:
            if self._c_table.size > limit:
                return self._c_table[: limit + 1]
            ds = np.arange(limit + 1, dtype=np.float64)
            table = np.zeros(limit + 1, dtype=np.float64)
            low = (ds >= 1) & (ds <= self.t_eff / math.e)
            table[low] = np.log(ds[low])
            middle = np.flatnonzero((ds > self.t_eff / math.e) & (ds < math.e * self.t_eff))
            for d in middle.tolist():
                table[d] = self.c(d)
            self._c_table = table
            return table

    def c_coeffs(self) -> TypeICoeffs:
        top = math.ceil(math.e * self.t_eff) - 1
        entries = {d: self.c(d) for d in range(1, top + 1)}
        return TypeICoeffs(cutoff=math.e * self.t_eff, entries={d: v for d, v in entries.items() if v})

    def flat_profile(self, y: float) -> float:
        """F(y) = int_T^U (1 - w(t)) (Phi_t - Phi_T)(y) log t dt/t.

        The flat part is the convolution sum_{d | n} chi(d) F(n/d); 1 - w
        vanishes on [x/T, x T], so F(y) = -Phi_T(y) K when [y/e, y e] stays there.
        """
        if self.T >= self.U:
            return 0.0
        tail = float(phi_t(self.T, y)) * self.K
        a, b = max(self.T, y / math.e), min(self.U, y * math.e)
        _, one_lo, one_hi, _ = self._edges
        if a >= b or (a >= one_lo and b <= one_hi):
            return -tail
        head = quad_log(
            lambda t: (1.0 - self.w(t)) * float(phi_t(t, y)) * math.log(t),
            a, b, self.tol, breaks=(y, *self._edges),
        )
        return head - tail

    def flat_table(self, limit: int) -> np.ndarray:
        """F(y) for y = 0..limit (index 0 unused)."""
        with self._lock:
            if self._flat_table.size > limit:
                return self._flat_table[: limit + 1]
            table = np.zeros(limit + 1, dtype=np.float64)
            for y in range(1, limit + 1):
                table[y] = self.flat_profile(y)
            self._flat_table = table
            return table

    def flat_window(self, lo: int, hi: int) -> np.ndarray:
        """(chi*log)^flat on [lo, hi] from F, independent of the Psi and c tables."""
        flat_tab = self.flat_table(hi)
        return dirichlet_window(self.chi.values, lambda m: flat_tab[m], lo, hi)

    def window(self, lo: int, hi: int) -> np.ndarray:
        psi_tab = self.psi_table(hi)
        c_tab = self.c_table(hi)
        chi = self.chi.values
        return dirichlet_window(chi, lambda m: psi_tab[m], lo, hi) + dirichlet_window(
            lambda m: c_tab[m], chi, lo, hi
        )


@lru_cache(maxsize=8)
def _kernel(x: int, D: float, chi: QuadChar, quad_tol: float | None) -> SharpKernel:
    return SharpKernel(x=x, D=D, chi=chi, quad_tol=quad_tol)


def sharp_kernel(params: SiegelParams, chi: QuadChar, quad_tol: float | None = None) -> SharpKernel:
    return _kernel(params.x, params.D.value, chi, quad_tol)


def chi_log_sharp(n: int, params: SiegelParams, chi: QuadChar, quad_tol: float | None = None) -> float:
    if n > 2 * params.x:
        raise PreconditionError(f"n={n} exceeds 2x={2 * params.x}")
    return sharp_kernel(params, chi, quad_tol).evaluate(n)


def chi_log_flat(n: int, params: SiegelParams, chi: QuadChar, quad_tol: float | None = None) -> float:
    return chi_log(n, chi) - chi_log_sharp(n, params, chi, quad_tol)


def Lambda_sharp(n: int, params: SiegelParams, chi: QuadChar, quad_tol: float | None = None) -> float:  # noqa: N802
    return chi_log_sharp(n, params, chi, quad_tol) * nu_direct(n, params.R.value)


def Lambda_flat(n: int, params: SiegelParams, chi: QuadChar, quad_tol: float | None = None) -> float:  # noqa: N802
    return Lambda_siegel(n, params.R.value, chi) - Lambda_sharp(n, params, chi, quad_tol)


def psi_big_coeffs(
    params: SiegelParams, chi: QuadChar, quad_tol: float | None = None
) -> tuple[Callable[[float], float], TypeICoeffs]:
    """(Psi, c) with chi_log_sharp(n) = sum_{d | n} (Psi(n/d) chi(d) + c_d chi(n/d))."""
    kernel = sharp_kernel(params, chi, quad_tol)
    return kernel.psi, kernel.c_coeffs()


# ---------------------------------------------------------------------------
# Windowed evaluation by name
# ---------------------------------------------------------------------------

BASE_HANDLES = ("one", "lambda", "mangoldt", "mu", "tau")
CHI_HANDLES = ("chi", "chi_log")
MODEL_HANDLES = (
    "nu",
    "lambda_siegel",
    "lambda_sharp",
    "lambda_flat",
    "Lambda_siegel",
    "Lambda_sharp",
    "Lambda_flat",
)
HANDLE_NAMES = BASE_HANDLES + CHI_HANDLES + MODEL_HANDLES


class ApproximantBank:
    """Resolves function names to window evaluators (lo, hi) -> float64 array.

    Windows of the base table are cached so that several handles on the
    same window share one sieve pass.
    """

    def __init__(
        self,
        chi: QuadChar | None = None,
        params: SiegelParams | None = None,
        quad_tol: float | None = None,
        cache_dir=None,
    ) -> None:
        self.chi = chi
        self.params = params
        self.quad_tol = quad_tol
        self.cache_dir = cache_dir
        self._lock = threading.Lock()
        self._tables: OrderedDict[tuple[int, int], ArithTable] = OrderedDict()
        self._handles: dict[str, WindowFn] = {}

    @staticmethod
    def names() -> tuple[str, ...]:
        return HANDLE_NAMES

    def _table(self, lo: int, hi: int) -> ArithTable:
        from .storage import load_or_build_window

        key = (lo, hi)
        with self._lock:
            if key in self._tables:
                self._tables.move_to_end(key)
                return self._tables[key]
        table = load_or_build_window(lo, hi, self.cache_dir)
        with self._lock:
            self._tables[key] = table
            while len(self._tables) > 4:
                self._tables.popitem(last=False)
        return table

    def _require(self, name: str, need_params: bool) -> tuple[QuadChar, SiegelParams | None]:
        if self.chi is None:
            raise PreconditionError(f"'{name}' needs a character (--delta)")
        if need_params and self.params is None:
            raise PreconditionError(f"'{name}' needs Siegel parameters")
        return self.chi, self.params

    def handle(self, name: str) -> WindowFn:
        if name not in HANDLE_NAMES:
            raise PreconditionError(f"unknown function '{name}'; choose from {', '.join(HANDLE_NAMES)}")
        if name not in self._handles:
            self._handles[name] = self._make(name)
        return self._handles[name]

    def _make(self, name: str) -> WindowFn:
        if name == "one":
            return lambda lo, hi: np.ones(hi - lo + 1, dtype=np.float64)
        if name in ("lambda", "mangoldt", "mu", "tau"):
            column = "liouville" if name == "lambda" else name
            return lambda lo, hi: getattr(self._table(lo, hi), column).astype(np.float64)
        if name in CHI_HANDLES:
            chi, _ = self._require(name, need_params=False)
            if name == "chi":
                return lambda lo, hi: chi.values(np.arange(lo, hi + 1, dtype=np.int64))
            return lambda lo, hi: chi_log_window(lo, hi, chi)

        chi, params = self._require(name, need_params=True)
        R, D = params.R.value, params.D.value
        nu = SieveNu(R)
        if name == "nu":
            return nu.window
        if name == "lambda_siegel":
            return lambda lo, hi: lambda_siegel_window(lo, hi, R, chi)
        if name == "lambda_sharp":
            return lambda lo, hi: _sharp_coeffs_cached(R, D, chi).window(lo, hi, chi)
        if name == "lambda_flat":
            return lambda lo, hi: lambda_siegel_window(lo, hi, R, chi) - _sharp_coeffs_cached(
                R, D, chi
            ).window(lo, hi, chi)

        kernel = sharp_kernel(params, chi, self.quad_tol)
        if name == "Lambda_siegel":
            return lambda lo, hi: chi_log_window(lo, hi, chi) * nu.window(lo, hi)
        if name == "Lambda_sharp":
            return lambda lo, hi: kernel.window(lo, hi) * nu.window(lo, hi)
        return lambda lo, hi: (chi_log_window(lo, hi, chi) - kernel.window(lo, hi)) * nu.window(lo, hi)


# ---------------------------------------------------------------------------
# Liouville vs Siegel model
# ---------------------------------------------------------------------------


def _error_rhs(n: int, x: int, R: float, chi: QuadChar) -> int:
    """#{exceptional p | n, R < p <= x/R} + #{d <= 2R, d | n : n/d is (>= x/R)-rough}."""
    first = sum(1 for p in factorint(n) if R < p <= x / R and chi(p) != -1)
    second = 0
    for d in divisors(n):
        if d > 2 * R:
            break
        m = n // d
        if m == 1 or min(factorint(m)) >= x / R:
            second += 1
    return first + second


def liouville_error_diagnostic(limit: int, x: int, R: float, chi: QuadChar) -> LiouvilleErrorReport:
    """Compare lambda with lambda_siegel on [1, limit] against the exceptional-prime bound."""
    if not 1 <= limit <= 2 * x:
        raise PreconditionError(f"need 1 <= limit <= 2x, got limit={limit}, x={x}")
    table = build_window(1, limit)
    model = lambda_siegel_window(1, limit, R, chi)
    mismatched = np.flatnonzero(table.liouville.astype(np.float64) != model) + 1
    uncovered = 0
    max_ratio = 0.0
    for n in mismatched.tolist():
        rhs = _error_rhs(n, x, R, chi)
        if rhs == 0:
            uncovered += 1
            continue
        diff = abs(table.at("liouville", n) - model[n - 1])
        max_ratio = max(max_ratio, diff / rhs)
    if uncovered:
        logger.error("%d Liouville mismatches are not covered by any exceptional prime", uncovered)
    return LiouvilleErrorReport(
        limit=limit, x=x, R=R, mismatches=int(mismatched.size), uncovered=uncovered, max_ratio=max_ratio
    )

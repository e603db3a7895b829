"""
Real primitive quadratic characters and the elementary exceptional-zero sums.

A character is indexed by a fundamental discriminant and realized as the
Kronecker symbol (delta | n). L(1, chi) and L'(1, chi) are summed exactly over
complete periods up to N = M q; the tail beyond N is expanded in the moments
M_j = sum_{r <= q} chi(r) r^j against Hurwitz zeta values, which mpmath
evaluates to high precision.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass
from functools import cached_property

import mpmath
import numpy as np
from scipy.special import digamma
from sympy import factorint
from sympy.functions.combinatorial.numbers import jacobi_symbol

from .arith_tables import primes_between
from .errors import (
    InvalidDiscriminantError,
    NonConvergenceError,
    PreconditionError,
    QualityBelowFloorError,
    RangeTooSmallError,
)
from .schemas import ExceptionalBand, ExceptionalSumReport, QualityProxy

logger = logging.getLogger(__name__)

ETA_FLOOR = 10.0
_HEAD_TERMS = 2**21
_MAX_MOMENTS = 80


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a | n) for n >= 0."""
    if n < 0:
        raise PreconditionError(f"n must be nonnegative, got {n}")
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    v2 = (n & -n).bit_length() - 1
    if v2:
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5) and v2 % 2:
            result = -1
        n >>= v2
    return result * int(jacobi_symbol(a % n, n))


def _is_squarefree(m: int) -> bool:
    return all(e == 1 for e in factorint(abs(m)).values())


def is_fundamental_discriminant(delta: int) -> bool:
    if delta in (0, 1):
        return False
    if delta % 4 == 1:
        return _is_squarefree(delta)
    if delta % 4 == 0:
        m = delta // 4
        return m % 4 in (2, 3) and _is_squarefree(m)
    return False


def fundamental_discriminants(bound: int) -> list[int]:
    """All fundamental discriminants with |delta| <= bound, ascending."""
    return [d for d in range(-bound, bound + 1) if is_fundamental_discriminant(d)]


@dataclass(frozen=True)
class QuadChar:
    """The primitive quadratic character n -> (delta | n)."""

    delta: int

    def __post_init__(self) -> None:
        if not is_fundamental_discriminant(self.delta):
            raise InvalidDiscriminantError(f"{self.delta} is not a fundamental discriminant")

    @property
    def conductor(self) -> int:
        return abs(self.delta)

    @cached_property
    def table(self) -> np.ndarray:
        """chi(r) for r = 0 .. q-1."""
        values = np.array([kronecker(self.delta, r) for r in range(self.conductor)], dtype=np.int8)
        values.flags.writeable = False
        return values

    def __call__(self, n: int) -> int:
        return int(self.table[n % self.conductor])

    def values(self, ns: np.ndarray) -> np.ndarray:
        return self.table[np.asarray(ns, dtype=np.int64) % self.conductor].astype(np.float64)

    @cached_property
    def _nonzero(self) -> list[tuple[int, int]]:
        return [(r, int(c)) for r, c in enumerate(self.table.tolist()) if c]

    def moment(self, j: int) -> int:
        """sum_{r=1}^{q} chi(r) r^j, exactly."""
        return sum(c * r**j for r, c in self._nonzero)


def chi_eval(chi: QuadChar, n: int) -> int:
    if n < 0:
        raise PreconditionError(f"n must be nonnegative, got {n}")
    return chi(n)


def exceptional_primes(chi: QuadChar, lo: int, hi: int) -> Iterator[int]:
    """Primes p in [lo, hi] with chi(p) != -1, ascending."""
    if hi < lo:
        return
    primes = primes_between(lo, hi)
    keep = primes[chi.values(primes) != -1.0]
    yield from keep.tolist()


def _blocks(q: int) -> int:
    return max(16, min(64, _HEAD_TERMS // q))


def _head(chi: QuadChar, terms: int, weighted: bool) -> float:
    ns = np.arange(1, terms + 1, dtype=np.float64)
    vals = chi.values(np.arange(1, terms + 1)) / ns
    if weighted:
        vals = -vals * np.log(ns)
    return math.fsum(vals.tolist())


def _tail(chi: QuadChar, blocks: int, tol: float, derivative: bool) -> float:
    q = chi.conductor
    with mpmath.workdps(40):
        log_q = mpmath.log(q)
        harmonic = mpmath.mpf(0)
        total = mpmath.mpf(0)
        for j in range(1, _MAX_MOMENTS + 1):
            harmonic += mpmath.mpf(1) / j
            zeta = mpmath.zeta(j + 1, blocks)
            scale = mpmath.mpf(chi.moment(j)) / mpmath.mpf(q) ** (j + 1)
            if derivative:
                dzeta = mpmath.zeta(j + 1, blocks, 1)
                term = -((-1) ** j) * scale * ((log_q - harmonic) * zeta - dzeta)
                bound = (log_q + harmonic) * zeta + abs(dzeta)
            else:
                term = (-1) ** j * scale * zeta
                bound = zeta
            total += term
            if bound < tol / 10:
                return float(total)
    raise NonConvergenceError(
        f"tail expansion for delta={chi.delta} did not settle after {_MAX_MOMENTS} moments"
    )


def l_one(chi: QuadChar, tol: float = 1e-12) -> float:
    """L(1, chi) to absolute accuracy tol."""
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    blocks = _blocks(chi.conductor)
    return _head(chi, blocks * chi.conductor, False) + _tail(chi, blocks, tol, False)


def l_prime_one(chi: QuadChar, tol: float = 1e-12) -> float:
    """L'(1, chi) = -sum chi(n) log n / n to absolute accuracy tol."""
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    blocks = _blocks(chi.conductor)
    return _head(chi, blocks * chi.conductor, True) + _tail(chi, blocks, tol, True)


def quality_proxy(chi: QuadChar, user_eta: float | None = None, tol: float = 1e-12) -> QualityProxy:
    if user_eta is not None:
        if user_eta < ETA_FLOOR:
            raise QualityBelowFloorError(f"eta must be at least {ETA_FLOOR:g}, got {user_eta}")
        return QualityProxy(eta_hat=float(user_eta), method="user-supplied")
    ratio = l_prime_one(chi, tol) / l_one(chi, tol) / math.log(chi.conductor)
    if ratio < ETA_FLOOR:
        logger.info("L'/L ratio %.4g for delta=%d clamped to %g", ratio, chi.delta, ETA_FLOOR)
    return QualityProxy(eta_hat=max(ETA_FLOOR, ratio), method="lprime-ratio")


def one_star_chi_partial(chi: QuadChar, x: int) -> float:
    """sum_{n <= x} (1 * chi)(n) / n via sum_{d <= x} chi(d)/d H(x // d)."""
    if x < 1:
        raise PreconditionError(f"x must be positive, got {x}")
    ds = np.arange(1, x + 1, dtype=np.int64)
    harmonic = digamma((x // ds + 1).astype(np.float64)) + np.euler_gamma
    terms = chi.values(ds) / ds * harmonic
    return math.fsum(terms.tolist())


def exceptional_sum_report(
    chi: QuadChar, x: int, eps: float, eta: QualityProxy
) -> ExceptionalSumReport:
    """Reciprocal sums of exceptional primes above q^((1+eps)/2) and in the bands below."""
    q = chi.conductor
    lower = q ** ((1.0 + eps) / 2.0)
    if x < lower:
        raise RangeTooSmallError(f"x={x} is below q^((1+eps)/2) = {lower:.6g}")
    lhs = math.fsum(1.0 / p for p in exceptional_primes(chi, math.floor(lower) + 1, x))
    bands: list[ExceptionalBand] = []
    top = math.floor(math.sqrt(math.log(eta.eta_hat))) + 1
    for m in range(2, top + 1):
        band_lo = q ** ((1.0 + eps) / (2.0 * m))
        band_hi = min(q ** ((1.0 + eps) / (2.0 * (m - 1))), float(x))
        value = math.fsum(
            1.0 / p for p in exceptional_primes(chi, math.floor(band_lo) + 1, math.floor(band_hi))
        )
        bands.append(
            ExceptionalBand(
                m=m,
                lower=band_lo,
                upper=band_hi,
                value=value,
                comparator=m / eta.eta_hat ** (1.0 / m),
            )
        )
    return ExceptionalSumReport(
        delta=chi.delta,
        x=x,
        eps=eps,
        eta=eta,
        lower=lower,
        lhs=lhs,
        comparator=math.log(x) / math.log(q) / eta.eta_hat,
        bands=bands,
    )

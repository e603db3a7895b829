"""
Exponential sums at desk-scale moduli.

All sums are exact finite sums over residues, with unit-circle values taken
from one shared table of q-th roots of unity per modulus. Full coefficient
matrices on the hyperbola n1 n2 = a (q) come from a two-dimensional DFT of
the masked weight.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from sympy import divisor_count, factorint

from .errors import PreconditionError
from .quad_char import QuadChar
from .schemas import CharShiftResult

logger = logging.getLogger(__name__)

WEIGHT_SLACK = 1e-12


@lru_cache(maxsize=64)
def unit_roots(q: int) -> np.ndarray:
    """e_q(m) = exp(2 pi i m / q) for m = 0..q-1."""
    if q < 1:
        raise PreconditionError(f"modulus must be positive, got {q}")
    roots = np.exp(2j * np.pi * np.arange(q) / q)
    roots.flags.writeable = False
    return roots


@lru_cache(maxsize=64)
def _unit_inverses(q: int) -> tuple[np.ndarray, np.ndarray]:
    units = np.array([r for r in range(q) if math.gcd(r, q) == 1], dtype=np.int64)
    inverses = np.array([pow(int(r), -1, q) for r in units], dtype=np.int64) if q > 1 else units.copy()
    return units, inverses


def _fsum_complex(values: np.ndarray) -> complex:
    return complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist()))


def kloosterman(u1: int, u2: int, q: int) -> complex:
    """S(u1, u2; q) = sum over units x mod q of e_q(u1 x + u2 x^{-1})."""
    if q < 1:
        raise PreconditionError(f"modulus must be positive, got {q}")
    if q == 1:
        return complex(1.0, 0.0)
    units, inverses = _unit_inverses(q)
    return _fsum_complex(unit_roots(q)[(u1 * units + u2 * inverses) % q])


def kloosterman_matrix(q: int) -> np.ndarray:
    """S(u1, u2; q) for all u1, u2 mod q."""
    units, inverses = _unit_inverses(q)
    roots = unit_roots(q)
    first = roots[np.outer(np.arange(q), units) % q]
    second = roots[np.outer(inverses, np.arange(q)) % q]
    return first @ second


def estermann_bound(u1: int, u2: int, q: int) -> float:
    """tau(q) q^{1/2} gcd(u1, u2, q)^{1/2}."""
    return int(divisor_count(q)) * math.sqrt(q) * math.sqrt(math.gcd(u1, u2, q))


def estermann_max_ratio(q: int) -> float:
    """max over all u1, u2 mod q of |S(u1, u2; q)| / estermann_bound(u1, u2, q)."""
    u = np.arange(q, dtype=np.int64)
    gcds = np.gcd(np.gcd.outer(u, u), q)
    bounds = int(divisor_count(q)) * math.sqrt(q) * np.sqrt(gcds)
    return float(np.max(np.abs(kloosterman_matrix(q)) / bounds))


@dataclass(frozen=True)
class PeriodicWeight:
    """A 1-bounded function on Z^2 with period ``period`` in each variable."""

    period: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.period < 1:
            raise PreconditionError("period must be positive")
        if self.values.shape != (self.period, self.period):
            raise PreconditionError(f"values must have shape ({self.period}, {self.period})")
        if np.max(np.abs(self.values)) > 1.0 + WEIGHT_SLACK:
            raise PreconditionError("weight must be 1-bounded")

    @classmethod
    def constant(cls, period: int = 1, value: complex = 1.0) -> PeriodicWeight:
        return cls(period, np.full((period, period), value, dtype=np.complex128))

    @classmethod
    def random(cls, period: int, rng: np.random.Generator) -> PeriodicWeight:
        modulus = rng.uniform(0.0, 1.0, size=(period, period))
        phase = rng.uniform(0.0, 2 * np.pi, size=(period, period))
        return cls(period, modulus * np.exp(1j * phase))

    def lift(self, q: int) -> np.ndarray:
        """The q x q table f(n1, n2), n1, n2 mod q."""
        if q % self.period:
            raise PreconditionError(f"period {self.period} does not divide {q}")
        idx = np.arange(q) % self.period
        return self.values[np.ix_(idx, idx)]


def _check_hyperbola(q: int, a: int, q0: int, f: PeriodicWeight) -> None:
    if q < 1 or q0 < 1 or q % q0:
        raise PreconditionError(f"q0={q0} must divide q={q}")
    if q0 % math.gcd(a, q):
        raise PreconditionError(f"gcd(a, q)={math.gcd(a, q)} must divide q0={q0}")
    if q0 % f.period:
        raise PreconditionError(f"weight period {f.period} must divide q0={q0}")


def _hyperbola_mask(q: int, a: int) -> np.ndarray:
    n = np.arange(q, dtype=np.int64)
    return (np.multiply.outer(n, n) - a) % q == 0


def hyperbola_fourier_coeff(q: int, a: int, q0: int, f: PeriodicWeight, u1: int, u2: int) -> complex:
    """E_{n1, n2 mod q} f(n1, n2) 1_{n1 n2 = a (q)} e_q(u1 n1 + u2 n2)."""
    _check_hyperbola(q, a, q0, f)
    n = np.arange(q, dtype=np.int64)
    phases = unit_roots(q)[np.add.outer(u1 * n, u2 * n) % q]
    terms = (f.lift(q) * _hyperbola_mask(q, a) * phases).ravel()
    return _fsum_complex(terms) / (q * q)


def hyperbola_fourier_matrix(q: int, a: int, q0: int, f: PeriodicWeight) -> np.ndarray:
    """All coefficients at once: entry [u1, u2] equals hyperbola_fourier_coeff(..., u1, u2)."""
    _check_hyperbola(q, a, q0, f)
    return np.fft.ifft2(f.lift(q) * _hyperbola_mask(q, a))


def hyperbola_bound(q: int, q0: int, u1: int, u2: int) -> float:
    """tau(q0)^2 q0^{3/2} tau(q) q^{-3/2} gcd(u1, u2, q)^{1/2}."""
    return (
        int(divisor_count(q0)) ** 2
        * q0**1.5
        * int(divisor_count(q))
        * q**-1.5
        * math.sqrt(math.gcd(u1, u2, q))
    )


@dataclass(frozen=True)
class MFEDecomposition:
    """f 1_{n1 n2 = a (q)} = main + sum over kept (u1, u2) of c[u1, u2] e_q(u1 n1 + u2 n2)."""

    q: int
    a: int
    q0: int
    q0_prime: int
    alpha: float
    main: np.ndarray
    coefficients: np.ndarray
    kept: np.ndarray
    excluded_max: float
    identity_residual: float

    def fourier_part(self) -> dict[tuple[int, int], complex]:
        u1s, u2s = np.nonzero(self.kept)
        return {(int(u1), int(u2)): complex(self.coefficients[u1, u2]) for u1, u2 in zip(u1s, u2s)}

    def max_bound_ratio(self) -> float:
        """max |c| / (2 tau(q0)^2 q0^{3/2} tau(q) q^{-3/2} gcd(u1, u2, q)^{1/2}) over kept pairs."""
        u1s, u2s = np.nonzero(self.kept)
        ratios = [
            abs(self.coefficients[u1, u2]) / (2 * hyperbola_bound(self.q, self.q0, int(u1), int(u2)))
            for u1, u2 in zip(u1s, u2s)
        ]
        return max(ratios, default=0.0)


def mfe_alpha(q: int, a: int, q0_prime: int) -> float:
    g = math.gcd(a, q)
    alpha = 1.0
    for p in factorint(q // q0_prime):
        if (q0_prime // g) % p:
            alpha *= p / (p - 1)
    return alpha


def mfe_decompose(q: int, a: int, q0: int, f: PeriodicWeight) -> MFEDecomposition:
    """Split f 1_{n1 n2 = a (q)} into the averaged main term and Fourier phases with q/q0 dividing neither frequency."""
    _check_hyperbola(q, a, q0, f)
    g = math.gcd(a, q)
    q0_prime = math.gcd(q0 * g, q)
    alpha = mfe_alpha(q, a, q0_prime)

    n = np.arange(q, dtype=np.int64)
    products = np.multiply.outer(n, n)
    weight = f.lift(q)
    target = weight * ((products - a) % q == 0)
    same_gcd = np.gcd(products % q, q) == g
    main = (alpha * q0_prime / q) * weight * (((products - a) % q0_prime == 0) & same_gcd)

    coefficients = np.fft.fft2(target - main) / (q * q)
    step = q // q0
    kept = np.logical_and.outer(n % step != 0, n % step != 0)
    excluded_max = float(np.max(np.abs(coefficients[~kept]), initial=0.0))
    rebuilt = main + np.fft.ifft2(np.where(kept, coefficients, 0.0)) * (q * q)
    residual = float(np.max(np.abs(rebuilt - target)))
    logger.debug("mfe q=%d a=%d q0=%d: residual %.3g, excluded max %.3g", q, a, q0, residual, excluded_max)
    return MFEDecomposition(
        q=q,
        a=a,
        q0=q0,
        q0_prime=q0_prime,
        alpha=alpha,
        main=main,
        coefficients=coefficients,
        kept=kept,
        excluded_max=excluded_max,
        identity_residual=residual,
    )


def char_shift_sum(
    chi: QuadChar,
    items: list[tuple[int, int, int | None]],
    lo: int,
    hi: int,
    x: int,
) -> CharShiftResult:
    """E_{n<=x} 1_I(n) prod_j 1_{d_j | n+h_j} prod_{j in J} chi((n+h_j)/d'_j).

    ``items`` holds (h_j, d_j, d'_j); j belongs to J when d'_j is not None.
    The skeleton is q^{1/2} gcd(d_1...d_m, q)^{1/2} (1/(q d_1...d_m) + 1/x).
    """
    if not any(dp is not None for _, _, dp in items):
        raise PreconditionError("at least one factor must carry a character")
    for h, d, dp in items:
        if d < 1 or h < 0:
            raise PreconditionError(f"invalid factor (h={h}, d={d})")
        if dp is not None and (dp < 1 or d % dp):
            raise PreconditionError(f"d'={dp} must divide d={d}")
    if x < 1:
        raise PreconditionError(f"x must be positive, got {x}")
    ns = np.arange(1, x + 1, dtype=np.int64)
    product = ((ns >= lo) & (ns <= hi)).astype(np.float64)
    for h, d, dp in items:
        shifted = ns + h
        divisible = shifted % d == 0
        product *= divisible
        if dp is not None:
            product *= np.where(divisible, chi.values(shifted // dp), 0.0)
    value = math.fsum(product.tolist()) / x
    q = chi.conductor
    modulus = math.prod(d for _, d, _ in items)
    skeleton = math.sqrt(q) * math.sqrt(math.gcd(modulus, q)) * (1.0 / (q * modulus) + 1.0 / x)
    return CharShiftResult(value=value, skeleton=skeleton, ratio=abs(value) / skeleton)


def weil_interval_sum(chi: QuadChar, h1: int, h2: int, lo: int, hi: int) -> int:
    """sum_{lo <= n <= hi} chi((n + h1)(n + h2))."""
    if hi < lo:
        return 0
    ns = np.arange(lo, hi + 1, dtype=np.int64)
    return int(np.sum(chi.table[(ns + h1) % chi.conductor].astype(np.int64) * chi.table[(ns + h2) % chi.conductor]))


def weil_interval_bound(chi: QuadChar, h1: int, h2: int, length: int) -> float:
    """Completed-sum bound for weil_interval_sum over any interval of the given length.

    Each odd p | q contributes 2 sqrt(p), or p when p | h1 - h2; the 2-part
    contributes 2^{v_2(q)}; completion costs 2 + log q per block of q terms.
    """
    q = chi.conductor
    local = 1.0
    for p, e in factorint(q).items():
        if p == 2:
            local *= 2.0**e
        elif (h1 - h2) % p == 0:
            local *= p
        else:
            local *= 2.0 * math.sqrt(p)
    return local * (2.0 + math.log(q)) * (math.ceil(length / q) + 1)

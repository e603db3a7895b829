"""
Segmented sieving of the base arithmetic functions.

A single sweep over the base primes p <= sqrt(hi) records, for every n in the
window, the exact power of p dividing n. That one pass drives the Liouville
function, Moebius, the divisor function, the smallest prime factor and the
von Mangoldt function at once; whatever cofactor survives the sweep is a
single prime larger than sqrt(hi).
"""

from __future__ import annotations

import logging
import math
import threading
from collections.abc import Callable, Iterator, Mapping
from dataclasses import dataclass, field
from functools import lru_cache
from math import isqrt
from typing import TYPE_CHECKING, Literal

import numpy as np
from sympy import divisors, factorint

from .config import get_settings
from .errors import (
    InvalidThresholdsError,
    PreconditionError,
    WindowOverflowError,
    WindowTooLargeError,
)

if TYPE_CHECKING:
    from .quad_char import QuadChar

logger = logging.getLogger(__name__)

MAX_HI = 2**63 - 1

VectorFn = Callable[[np.ndarray], np.ndarray]


def _eratosthenes(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    is_prime = np.ones(n + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, isqrt(n) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    primes = np.flatnonzero(is_prime).astype(np.int64)
    primes.flags.writeable = False
    return primes


@lru_cache(maxsize=16)
def primes_up_to(n: int) -> np.ndarray:
    """All primes <= n as a read-only int64 array (Eratosthenes)."""
    return _eratosthenes(n)


_base_lock = threading.Lock()
_base_cache: np.ndarray = np.zeros(0, dtype=np.int64)
_base_limit = 1


def _cached_base_primes(limit: int) -> np.ndarray:
    """Primes <= limit from a shared table that only ever grows."""
    global _base_cache, _base_limit
    with _base_lock:
        if limit > _base_limit:
            cap = get_settings().SIEGEL_LAB_BASE_PRIME_CACHE
            target = min(cap, max(limit, 2 * _base_limit))
            _base_cache = _eratosthenes(target)
            _base_limit = target
            logger.debug("Base prime table extended to %d (%d primes)", target, _base_cache.size)
        table = _base_cache
    return table[: int(np.searchsorted(table, limit, side="right"))]


def base_primes(limit: int) -> Iterator[np.ndarray]:
    """Primes <= limit in ascending blocks.

    Primes up to SIEGEL_LAB_BASE_PRIME_CACHE come from one shared table, built
    once and reused by every window. Beyond the cap the remaining primes are
    sieved segment by segment, so memory stays bounded by the window size.
    """
    cap = get_settings().SIEGEL_LAB_BASE_PRIME_CACHE
    yield _cached_base_primes(min(limit, cap))
    if limit > cap:
        block = get_settings().SIEGEL_LAB_WINDOW_SIZE
        for blo, bhi in iter_windows(cap + 1, limit, block):
            yield primes_between(blo, bhi)


def primes_between(lo: int, hi: int) -> np.ndarray:
    """Primes in [lo, hi] by a segmented sieve over the window only."""
    lo = max(lo, 2)
    if hi < lo:
        return np.zeros(0, dtype=np.int64)
    mask = np.ones(hi - lo + 1, dtype=bool)
    for block in base_primes(isqrt(hi)):
        for p in block.tolist():
            start = max(p * p, -(-lo // p) * p)
            if start > hi:
                continue
            mask[start - lo :: p] = False
    return np.flatnonzero(mask).astype(np.int64) + lo


def iter_windows(lo: int, hi: int, size: int) -> Iterator[tuple[int, int]]:
    """Partition [lo, hi] into consecutive windows of at most ``size`` entries."""
    if size < 1:
        raise PreconditionError(f"window size must be positive, got {size}")
    start = lo
    while start <= hi:
        stop = min(hi, start + size - 1)
        yield start, stop
        start = stop + 1


def _check_window(lo: int, hi: int) -> None:
    if lo < 1 or hi < lo:
        raise PreconditionError(f"invalid window [{lo}, {hi}]")
    if hi > MAX_HI:
        raise WindowOverflowError(f"hi={hi} exceeds 2^63-1")
    limit = get_settings().SIEGEL_LAB_WINDOW_SIZE
    if hi - lo + 1 > limit:
        raise WindowTooLargeError(
            f"window [{lo}, {hi}] has {hi - lo + 1} entries, configured limit is {limit}"
        )


def _prime_power_sweep(lo: int, hi: int) -> Iterator[tuple[int | np.ndarray, np.ndarray, np.ndarray]]:
    """Yield (p, offsets, exponents) with p^exponent || lo + offset.

    Base primes come first in ascending order, one yield per prime. The last
    yield carries the leftover large primes as an array aligned with offsets.
    """
    size = hi - lo + 1
    rem = np.arange(size, dtype=np.int64) + lo
    for block in base_primes(isqrt(hi)):
        for p in block.tolist():
            first = -(-lo // p) * p
            if first > hi:
                continue
            base = first - lo
            idx = np.arange(base, size, p, dtype=np.int64)
            exps = np.ones(idx.size, dtype=np.int64)
            pk = p * p
            while pk <= hi:
                first_k = -(-lo // pk) * pk
                if first_k > hi:
                    break
                exps[(np.arange(first_k - lo, size, pk, dtype=np.int64) - base) // p] += 1
                pk *= p
            rem[idx] //= np.power(np.int64(p), exps)
            yield p, idx, exps
    big = np.flatnonzero(rem > 1)
    if big.size:
        yield rem[big], big, np.ones(big.size, dtype=np.int64)


@dataclass(frozen=True)
class ArithTable:
    """Sieved window [lo, hi]; every array is indexed by n - lo and read-only."""

    lo: int
    hi: int
    liouville: np.ndarray
    mangoldt: np.ndarray
    mu: np.ndarray
    tau: np.ndarray
    spf: np.ndarray

    def __post_init__(self) -> None:
        for name in ("liouville", "mangoldt", "mu", "tau", "spf"):
            getattr(self, name).flags.writeable = False

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    @property
    def ns(self) -> np.ndarray:
        return np.arange(len(self), dtype=np.int64) + self.lo

    def at(self, name: str, n: int) -> float:
        if not self.lo <= n <= self.hi:
            raise PreconditionError(f"n={n} outside window [{self.lo}, {self.hi}]")
        return getattr(self, name)[n - self.lo].item()


def build_window(lo: int, hi: int) -> ArithTable:
    """Sieve liouville, mangoldt, mu, tau and spf over [lo, hi]."""
    _check_window(lo, hi)
    size = hi - lo + 1
    liouville = np.ones(size, dtype=np.int8)
    mu = np.ones(size, dtype=np.int8)
    tau = np.ones(size, dtype=np.int64)
    spf = np.zeros(size, dtype=np.int64)
    distinct = np.zeros(size, dtype=np.int8)

    for p, idx, exps in _prime_power_sweep(lo, hi):
        odd = (exps & 1).astype(bool)
        liouville[idx] = np.where(odd, -liouville[idx], liouville[idx])
        mu[idx] = np.where(exps > 1, 0, -mu[idx])
        tau[idx] *= exps + 1
        unset = spf[idx] == 0
        spf[idx[unset]] = p[unset] if isinstance(p, np.ndarray) else p
        distinct[idx] += 1

    spf[spf == 0] = 1
    mangoldt = np.where(distinct == 1, np.log(spf.astype(np.float64)), 0.0)
    logger.debug("Sieved window [%d, %d] (%d entries)", lo, hi, size)
    return ArithTable(lo=lo, hi=hi, liouville=liouville, mangoldt=mangoldt, mu=mu, tau=tau, spf=spf)


def completely_multiplicative_window(lo: int, hi: int, prime_value: VectorFn) -> np.ndarray:
    """Evaluate the completely multiplicative f with f(p) = prime_value(p) on [lo, hi]."""
    _check_window(lo, hi)
    values = np.ones(hi - lo + 1, dtype=np.float64)
    for p, idx, exps in _prime_power_sweep(lo, hi):
        primes = p if isinstance(p, np.ndarray) else np.full(idx.size, p, dtype=np.int64)
        values[idx] *= np.power(np.asarray(prime_value(primes), dtype=np.float64), exps)
    return values


def dirichlet_window(f: VectorFn, g: VectorFn, lo: int, hi: int) -> np.ndarray:
    """(f * g)(n) for n in [lo, hi], splitting each divisor pair at sqrt(hi)."""
    _check_window(lo, hi)
    size = hi - lo + 1
    out = np.zeros(size, dtype=np.float64)
    s = isqrt(hi)
    for d in range(1, s + 1):
        first = -(-lo // d) * d
        if first > hi:
            continue
        multiples = np.arange(first, hi + 1, d, dtype=np.int64)
        cofactors = multiples // d
        f_d = float(np.asarray(f(np.array([d], dtype=np.int64)))[0])
        g_d = float(np.asarray(g(np.array([d], dtype=np.int64)))[0])
        offsets = multiples - lo
        if f_d != 0.0:
            out[offsets] += f_d * np.asarray(g(cofactors), dtype=np.float64)
        if g_d != 0.0:
            large = cofactors > s
            if large.any():
                out[offsets[large]] += g_d * np.asarray(f(cofactors[large]), dtype=np.float64)
    return out


def smooth_rough_split(n: int, z: float) -> tuple[int, int]:
    """Split n into its z-smooth and z-rough parts."""
    if n < 1:
        raise PreconditionError(f"n must be positive, got {n}")
    smooth = 1
    for p, e in factorint(n).items():
        if p <= z:
            smooth *= p**e
    return smooth, n // smooth


def landreau_factor(n: int, y: float, z: float) -> tuple[int, list[int]]:
    """Factor n as rough * prod(parts) with every part z-smooth and <= y.

    Smooth primes are taken largest first and packed greedily: a part is
    closed once the next prime would push it above y, so every closed part
    exceeds y / z.
    """
    if not y > z > 1:
        raise InvalidThresholdsError(f"need y > z > 1, got y={y}, z={z}")
    if n < 1:
        raise PreconditionError(f"n must be positive, got {n}")
    smooth, rough = smooth_rough_split(n, z)
    primes = sorted(
        (p for p, e in factorint(smooth).items() for _ in range(e)),
        reverse=True,
    )
    parts: list[int] = []
    current = 1
    for p in primes:
        if current * p > y:
            parts.append(current)
            current = 1
        current *= p
    if current > 1:
        parts.append(current)
    return rough, parts


def divisors_up_to(n: int, bound: int) -> list[int]:
    if n < 1 or bound < 1:
        raise PreconditionError(f"need n, bound >= 1, got n={n}, bound={bound}")
    return [d for d in divisors(n) if d <= bound]


def mobius(n: int) -> int:
    exps = factorint(n).values()
    if any(e > 1 for e in exps):
        return 0
    return -1 if len(exps) % 2 else 1


def liouville(n: int) -> int:
    return -1 if sum(factorint(n).values()) % 2 else 1


def mertens_diagnostics(z: int) -> tuple[float, float]:
    """Return (sum_{p<=z} 1/p - log log z, prod_{p<=z} (1 - 1/p) * log z)."""
    if z < 3:
        raise PreconditionError(f"z must be at least 3, got {z}")
    primes = primes_up_to(z).astype(np.float64)
    reciprocal = math.fsum((1.0 / primes).tolist()) - math.log(math.log(z))
    product = math.exp(math.fsum(np.log1p(-1.0 / primes).tolist())) * math.log(z)
    return reciprocal, product


@dataclass(frozen=True)
class TypeICoeffs:
    """Finite coefficient map representing n -> sum_{d | n, d <= cutoff} c_d [chi(n/d)]."""

    cutoff: float
    entries: Mapping[int, float] = field(default_factory=dict)
    twist: Literal["none", "chi-cofactor"] = "none"

    def __post_init__(self) -> None:
        bad = [d for d in self.entries if d < 1 or d > self.cutoff]
        if bad:
            raise PreconditionError(f"keys outside [1, {self.cutoff}]: {sorted(bad)[:5]}")

    def _require_chi(self, chi: QuadChar | None) -> None:
        if self.twist == "chi-cofactor" and chi is None:
            raise PreconditionError("chi-cofactor coefficients need a character")

    def evaluate(self, n: int, chi: QuadChar | None = None) -> float:
        self._require_chi(chi)
        terms = []
        for d in divisors_up_to(n, max(1, int(self.cutoff))):
            c = self.entries.get(d)
            if c is None:
                continue
            terms.append(c * chi(n // d) if self.twist == "chi-cofactor" else c)
        return math.fsum(terms)

    def window(self, lo: int, hi: int, chi: QuadChar | None = None) -> np.ndarray:
        """Scatter each c_d into the progression 0 mod d across [lo, hi]."""
        self._require_chi(chi)
        out = np.zeros(hi - lo + 1, dtype=np.float64)
        for d, c in sorted(self.entries.items()):
            first = -(-lo // d) * d
            if first > hi:
                continue
            if self.twist == "chi-cofactor":
                multiples = np.arange(first, hi + 1, d, dtype=np.int64)
                out[first - lo :: d] += c * chi.values(multiples // d)
            else:
                out[first - lo :: d] += c
        return out

    def l1_norm(self) -> float:
        return math.fsum(abs(c) / d for d, c in self.entries.items())

    def rows(self) -> list[tuple[int, float]]:
        return sorted(self.entries.items())

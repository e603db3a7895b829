"""
The smoothed Selberg sieve nu(n) = (sum_{d | n} mu(d) psi_{<=R}(d))^2.

Two representations are kept: the root coefficients mu(d) psi_{<=R}(d) for
d < R, which are scattered over a window and squared, and the expanded
weights a_d = sum_{[d1, d2] = d} mu psi(d1) mu psi(d2) supported on d < R^2.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from sympy import divisor_count

from .arith_tables import TypeICoeffs, build_window, divisors_up_to, mobius
from .config import get_settings
from .errors import PreconditionError, SieveSupportTooLargeError
from .schemas import NuSieveReport
from .smoothing import psi_le

logger = logging.getLogger(__name__)


def _support(R: float) -> int:
    """Largest integer strictly below R."""
    return math.ceil(R) - 1


def sieve_root_coeffs(R: float) -> TypeICoeffs:
    """d -> mu(d) psi_{<=R}(d), nonzero only for squarefree d < R."""
    if R <= 1:
        raise PreconditionError(f"R must exceed 1, got {R}")
    top = _support(R)
    table = build_window(1, max(1, top))
    ds = table.ns
    values = table.mu.astype(np.float64) * np.asarray(psi_le(R, ds.astype(np.float64)))
    keep = values != 0.0
    entries = {int(d): float(v) for d, v in zip(ds[keep].tolist(), values[keep].tolist())}
    return TypeICoeffs(cutoff=float(max(1, top)), entries=entries)


def nu_direct(n: int, R: float) -> float:
    """nu(n) from the divisors of n alone, without sieving a window."""
    if n < 1:
        raise PreconditionError(f"n must be positive, got {n}")
    if R <= 1:
        raise PreconditionError(f"R must exceed 1, got {R}")
    root = math.fsum(
        mobius(d) * float(psi_le(R, d)) for d in divisors_up_to(n, max(1, _support(R)))
    )
    return root * root


def nu_weights(R: float, max_support: int | None = None) -> TypeICoeffs:
    """Expanded weights a_d with sum_{d | n} a_d = nu(n) for every n."""
    bound = max_support or get_settings().SIEGEL_LAB_MAX_SIEVE_SUPPORT
    if R * R > bound:
        raise SieveSupportTooLargeError(f"R^2 = {R * R:.6g} exceeds the configured bound {bound}")
    root = sieve_root_coeffs(R)
    ds = np.array(list(root.entries), dtype=np.int64)
    vals = np.array(list(root.entries.values()), dtype=np.float64)
    lcms = np.lcm.outer(ds, ds).ravel()
    weights = np.bincount(lcms, weights=np.outer(vals, vals).ravel())
    support = np.flatnonzero(weights)
    logger.debug("nu_weights(R=%g): %d pairs, %d nonzero weights", R, lcms.size, support.size)
    entries = {int(d): float(weights[d]) for d in support.tolist()}
    return TypeICoeffs(cutoff=float(R * R), entries=entries)


@dataclass(frozen=True)
class SieveNu:
    R: float

    def __post_init__(self) -> None:
        if self.R <= 1:
            raise PreconditionError(f"R must exceed 1, got {self.R}")

    @cached_property
    def root(self) -> TypeICoeffs:
        return sieve_root_coeffs(self.R)

    @cached_property
    def weights(self) -> TypeICoeffs:
        return nu_weights(self.R)

    def __call__(self, n: int) -> float:
        return self.root.evaluate(n) ** 2

    def window(self, lo: int, hi: int) -> np.ndarray:
        return self.root.window(lo, hi) ** 2


def majorant_check(table, R: float, slack: float = 1e-10) -> int:
    """Count n in the window with 1_{(>R)}(n) > nu(n) + slack."""
    nu = SieveNu(R).window(table.lo, table.hi)
    rough = (table.spf > R) | (table.ns == 1)
    violations = int(np.count_nonzero(rough & (1.0 > nu + slack)))
    if violations:
        logger.warning("Selberg majorant violated at %d points in [%d, %d]", violations, table.lo, table.hi)
    return violations


def nusieve_lhs(
    x: int,
    shifts: Sequence[int],
    moduli: Sequence[int],
    R: float,
    extra: Sequence[tuple[int, int]] = (),
) -> float:
    """E_{n<=x} prod_j nu(n+h_j) 1_{d_j | n+h_j} prod_i 1_{d'_i | n+h'_i}.

    ``extra`` holds the (d', h') pairs of divisibility-only factors.
    """
    if len(shifts) != len(moduli):
        raise PreconditionError("need one modulus per shift")
    if any(d < 1 or d > x for d in [*moduli, *(d for d, _ in extra)]):
        raise PreconditionError("all moduli must lie in [1, x]")
    ns = np.arange(1, x + 1, dtype=np.int64)
    product = np.ones(x, dtype=np.float64)
    nu = SieveNu(R) if shifts else None
    for h, d in zip(shifts, moduli):
        product *= nu.window(1 + h, x + h) * ((ns + h) % d == 0)
    for d, h in extra:
        product *= (ns + h) % d == 0
    return math.fsum(product.tolist()) / x


def nusieve_report(
    x: int,
    shifts: Sequence[int],
    moduli: Sequence[int],
    R: float,
    extra: Sequence[tuple[int, int]] = (),
) -> NuSieveReport:
    """The average together with its ratio to tau(D)^C / (D log^k R), C = 1, 2, 3."""
    lhs = nusieve_lhs(x, shifts, moduli, R, extra)
    modulus = math.prod([*moduli, *(d for d, _ in extra)])
    tau = int(divisor_count(modulus))
    skeleton = {c: tau**c / (modulus * math.log(R) ** len(shifts)) for c in (1, 2, 3)}
    return NuSieveReport(lhs=lhs, skeleton=skeleton, ratios={c: lhs / s for c, s in skeleton.items()})

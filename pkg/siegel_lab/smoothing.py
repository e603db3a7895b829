"""
Fixed smooth cutoffs and the quadrature engine for t-integrals.

psi equals 1 on [-1/2, 1/2], vanishes outside (-1, 1) and is built from the
bump g(s) = exp(-1/s); phi is the normalized bump c exp(-1/(1 - u^2)). Every
t-integral is taken against dt/t, i.e. in the coordinate u = log t, with
scipy's adaptive QUADPACK routines.
"""

from __future__ import annotations

import hashlib
import logging
import math
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Literal

import mpmath
import numpy as np
from scipy import integrate
from scipy.integrate import IntegrationWarning

from .errors import PreconditionError, QuadratureError

logger = logging.getLogger(__name__)

ArrayLike = float | np.ndarray


def _bump(s: np.ndarray) -> np.ndarray:
    pos = s > 0
    return np.where(pos, np.exp(-1.0 / np.where(pos, s, 1.0)), 0.0)


def _scalar_or_array(values: np.ndarray, like: ArrayLike) -> ArrayLike:
    return float(values) if np.ndim(like) == 0 else values


def psi(u: ArrayLike) -> ArrayLike:
    a = np.abs(np.asarray(u, dtype=np.float64))
    left = _bump(1.0 - a)
    right = _bump(a - 0.5)
    band = (a > 0.5) & (a < 1.0)
    out = np.where(a <= 0.5, 1.0, 0.0)
    out = np.where(band, left / np.where(band, left + right, 1.0), out)
    return _scalar_or_array(out, u)


def psi_prime(u: ArrayLike) -> ArrayLike:
    """Closed-form derivative of psi; zero off the transition band."""
    uu = np.asarray(u, dtype=np.float64)
    a = np.abs(uu)
    band = (a > 0.5) & (a < 1.0)
    safe = np.where(band, a, 0.75)
    left = np.exp(-1.0 / (1.0 - safe))
    right = np.exp(-1.0 / (safe - 0.5))
    slope = -left * right * (1.0 / (1.0 - safe) ** 2 + 1.0 / (safe - 0.5) ** 2) / (left + right) ** 2
    out = np.where(band, np.sign(uu) * slope, 0.0)
    return _scalar_or_array(out, u)


def _phi_mass() -> float:
    """Integral of exp(-1/(1-u^2)) over (-1, 1) by tanh-sinh, exact to double precision."""
    def bump(u: mpmath.mpf) -> mpmath.mpf:
        gap = 1 - u * u
        return mpmath.exp(-1 / gap) if gap > 0 else mpmath.mpf(0)

    with mpmath.workdps(30):
        value = 2 * mpmath.quad(bump, [0, 1])
    return float(value)


PHI_MASS = _phi_mass()


def phi(u: ArrayLike) -> ArrayLike:
    uu = np.asarray(u, dtype=np.float64)
    inside = np.abs(uu) < 1.0
    safe = np.where(inside, uu, 0.0)
    out = np.where(inside, np.exp(-1.0 / (1.0 - safe * safe)), 0.0) / PHI_MASS
    return _scalar_or_array(out, u)


def psi_le(z: float, n: ArrayLike) -> ArrayLike:
    """psi(log_z n)."""
    if z <= 1:
        raise PreconditionError(f"z must exceed 1, got {z}")
    nn = np.asarray(n, dtype=np.float64)
    return _scalar_or_array(np.asarray(psi(np.log(nn) / math.log(z))), n)


def psi_gt(z: float, n: ArrayLike) -> ArrayLike:
    """1 - psi(log_z n)."""
    le = psi_le(z, n)
    return 1.0 - le


def phi_t(t: float, n: ArrayLike) -> ArrayLike:
    """phi(log(n / t)); a smooth cutoff to [t/e, e t]."""
    nn = np.asarray(n, dtype=np.float64)
    return _scalar_or_array(np.asarray(phi(np.log(nn / t))), n)


def _quad(
    func: Callable[[float], float],
    a: float,
    b: float,
    tol: float,
    label: str,
    **options: object,
) -> float:
    """scipy.integrate.quad with absolute tolerance ``tol``.

    QUADPACK warnings are collected rather than raised; the call fails with
    QuadratureError only when the returned error estimate exceeds ``tol``.
    Warnings of other categories are passed through.
    """
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        value, err = integrate.quad(func, a, b, epsabs=tol, epsrel=0.0, **options)
    issues = []
    for w in caught:
        if issubclass(w.category, IntegrationWarning):
            issues.append(w)
        else:
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    if issues:
        if not err <= tol:
            raise QuadratureError(f"{label} failed: {issues[0].message}")
        logger.debug("%s warned but met tolerance (err=%.3g)", label, err)
    return value


def quad_log(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float,
    breaks: Sequence[float] = (),
) -> float:
    """Adaptive quadrature of the integral of f(t) dt/t over [a, b] in u = log t.

    ``breaks`` are t-values where f has kinks or support edges; the interval
    is split there and each piece integrated separately against its share of
    ``tol``.
    """
    if not 0 < a < b:
        raise PreconditionError(f"need 0 < a < b, got a={a}, b={b}")
    lo, hi = math.log(a), math.log(b)
    cuts = sorted({lo, hi, *(math.log(t) for t in breaks if a < t < b)})
    share = tol / len(cuts)
    pieces = []
    for left, right in zip(cuts, cuts[1:]):
        if right <= left:
            continue
        label = f"quadrature on [{math.exp(left):.6g}, {math.exp(right):.6g}]"
        pieces.append(_quad(lambda u: f(math.exp(u)), left, right, share, label, limit=500))
    return math.fsum(pieces)


def log_identity_residual(n: int, quad_tol: float = 1e-10) -> float:
    """|integral of Phi_t(n) log t dt/t - log n|, over t in [n/e, n e]."""
    if n < 1:
        raise PreconditionError(f"n must be positive, got {n}")
    value = quad_log(lambda t: phi_t(t, n) * math.log(t), n / math.e, n * math.e, quad_tol, breaks=(n,))
    return abs(value - math.log(n))


def _oscillatory(h: Callable[[float], float], frequency: float) -> float:
    """(1/pi) * integral over (0, 1) of h(v) sin(T v) / v dv."""
    knot = min(1.0, math.pi / frequency)
    label = f"oscillatory quadrature at T={frequency}"
    head = _quad(
        lambda v: h(v) * frequency * np.sinc(frequency * v / math.pi), 0.0, knot, 1e-11, label, limit=200
    )
    tail = 0.0
    if knot < 1.0:
        tail = _quad(lambda v: h(v) / v, knot, 1.0, 1e-11, label, weight="sin", wvar=frequency, limit=2000)
    return (head + tail) / math.pi


def fourier_checks(frequency: float = 4000.0, cross_check_at: float = 40.0) -> tuple[float, float]:
    """Residuals of the two Fourier identities for f, the transform of u -> e^u psi(u).

    Truncating the t-integrals at |t| <= T turns them into Dirichlet-kernel
    integrals over the support of psi:
    integral f dt -> 1 and integral (1 + i t) f dt -> -psi'(0) = 0.

    At the shorter truncation ``cross_check_at`` the kernel form is compared
    with a direct t-quadrature of ``fourier_transform``; a disagreement above
    1e-7 raises QuadratureError.
    """
    cosh_psi = lambda v: math.cosh(v) * psi(v)  # noqa: E731
    short = 2.0 * _oscillatory(cosh_psi, cross_check_at)
    # f(-t) is the conjugate of f(t)
    direct = 2.0 * _quad(
        lambda t: fourier_transform(t).real, 0.0, cross_check_at, 1e-10,
        f"direct Fourier quadrature up to T={cross_check_at}", limit=200,
    )
    gap = abs(direct - short)
    if gap > 1e-7:
        raise QuadratureError(
            f"truncated Fourier integral at T={cross_check_at}: direct {direct:.12g} vs kernel {short:.12g}"
        )
    logger.debug("Fourier cross-check at T=%g: |direct - kernel| = %.3g", cross_check_at, gap)

    zeroth = 2.0 * _oscillatory(cosh_psi, frequency)
    first = -2.0 * _oscillatory(lambda v: math.sinh(v) * psi_prime(v), frequency)
    return abs(zeroth - 1.0), abs(first)


def fourier_transform(t: float) -> complex:
    """f(t) = (1/2pi) integral of e^v psi(v) e^{i v t} dv, so that e^v psi(v) = integral f(t) e^{-i v t} dt."""
    kernel = lambda v: math.exp(v) * psi(v)  # noqa: E731
    label = f"Fourier transform at t={t}"
    if t == 0:
        return complex(_quad(kernel, -1.0, 1.0, 1e-12, label, limit=200) / (2 * math.pi), 0.0)
    real = _quad(kernel, -1.0, 1.0, 1e-12, label, weight="cos", wvar=t, limit=500)
    imag = _quad(kernel, -1.0, 1.0, 1e-12, label, weight="sin", wvar=t, limit=500)
    return complex(real, imag) / (2 * math.pi)


@dataclass(frozen=True)
class SmoothCutoff:
    kind: Literal["psi", "phi"]
    resolution: int = 1025

    def __post_init__(self) -> None:
        if self.resolution < 2:
            raise PreconditionError("resolution must be at least 2")

    def __call__(self, u: ArrayLike) -> ArrayLike:
        return psi(u) if self.kind == "psi" else phi(u)

    def samples(self) -> np.ndarray:
        return np.asarray(self(np.linspace(-1.0, 1.0, self.resolution)))

    def fingerprint(self) -> str:
        digest = hashlib.sha1(np.round(self.samples(), 12).tobytes())  # nosec - non-crypto use
        return f"{self.kind}:{digest.hexdigest()[:16]}"


def cutoff_fingerprint() -> str:
    return ";".join(SmoothCutoff(kind).fingerprint() for kind in ("psi", "phi"))

from __future__ import annotations

from typing import Annotated, Any, Literal

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, field_validator, model_validator

REPORT_VERSION = 1

Provenance = Literal["formula", "override", "clamped"]


def _parse_int(value: Any) -> Any:
    """Accept integers written as '1e6' or 1e6 as long as they are whole."""
    if isinstance(value, str):
        text = value.strip().replace("_", "")
        try:
            return int(text)
        except ValueError:
            number = float(text)
            if not number.is_integer():
                raise ValueError(f"expected an integer, got {value!r}") from None
            return int(number)
    if isinstance(value, float):
        if not value.is_integer():
            raise ValueError(f"expected an integer, got {value!r}")
        return int(value)
    return value


def _parse_int_list(value: Any) -> Any:
    if isinstance(value, str):
        parts = [p for p in value.replace(";", ",").split(",") if p.strip()]
        return [_parse_int(p) for p in parts]
    if isinstance(value, (int, float)):
        return [_parse_int(value)]
    if isinstance(value, (list, tuple)):
        return [_parse_int(v) for v in value]
    return value


def _parse_str_list(value: Any) -> Any:
    if isinstance(value, str):
        return [p.strip() for p in value.split(",") if p.strip()]
    return value


IntLike = Annotated[int, BeforeValidator(_parse_int)]
IntList = Annotated[list[int], BeforeValidator(_parse_int_list)]
StrList = Annotated[list[str], BeforeValidator(_parse_str_list)]


class QualityProxy(BaseModel):
    """Stand-in for the quality of a hypothetical exceptional zero."""

    model_config = ConfigDict(frozen=True)

    eta_hat: float = Field(..., gt=0.0, description="Quality value used to set scales")
    method: Literal["user-supplied", "lprime-ratio"] = Field(
        ..., description="How eta_hat was obtained"
    )


class ScaleValue(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float = Field(..., gt=0.0)
    provenance: Provenance


class SiegelParams(BaseModel):
    """Scales x, R, D, R0 and exponents shared by every approximant."""

    model_config = ConfigDict(frozen=True)

    x: int = Field(..., ge=2)
    k: int = Field(0, ge=0, le=16)
    ell: int = Field(0, ge=0, le=16)
    eps0: float = Field(0.5, gt=0.0, lt=1.0)
    eta: QualityProxy
    R: ScaleValue
    D: ScaleValue
    R0: ScaleValue

    @model_validator(mode="after")
    def _check_ranges(self) -> "SiegelParams":
        if not 2.0 <= self.R.value <= self.x:
            raise ValueError(f"R={self.R.value} outside [2, x]")
        if not 2.0 <= self.D.value <= self.x:
            raise ValueError(f"D={self.D.value} outside [2, x]")
        if not 2.0 <= self.R0.value <= self.R.value:
            raise ValueError(f"R0={self.R0.value} outside [2, R]")
        return self


class ShiftSystem(BaseModel):
    """Shifts h_1..h_k (von Mangoldt-type factors) and h'_1..h'_l (Liouville-type)."""

    model_config = ConfigDict(frozen=True)

    h: IntList = Field(default_factory=list)
    h_prime: IntList = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_distinct(self) -> "ShiftSystem":
        shifts = [*self.h, *self.h_prime]
        if any(s < 0 for s in shifts):
            raise ValueError("shifts must be natural numbers")
        if len(set(shifts)) != len(shifts):
            raise ValueError(f"shifts must be pairwise distinct, got {shifts}")
        return self

    @property
    def k(self) -> int:
        return len(self.h)

    @property
    def ell(self) -> int:
        return len(self.h_prime)

    @property
    def max_shift(self) -> int:
        return max([*self.h, *self.h_prime], default=0)


class SingularSeries(BaseModel):
    value: float = Field(..., description="Partial Euler product over p <= prime_cutoff")
    tail: float = Field(..., ge=0.0, description="Bound on |log| of the omitted factors")
    lower: float
    upper: float
    prime_cutoff: int


class ReportHeader(BaseModel):
    """Provenance carried by every written report."""

    report_version: Literal[1] = REPORT_VERSION
    software_version: str
    cutoff_fingerprint: str = Field(..., description="Hash of sampled psi and phi values")
    params: SiegelParams | None = Field(None, description="Scales with formula/override/clamped provenance")
    eta: QualityProxy | None = Field(None, description="Quality value and how it was obtained")
    config: dict[str, Any] | None = None


class ChainGap(BaseModel):
    step: str
    absolute: float
    relative: float | None = Field(None, description="absolute / |line (i)|, when nonzero")


class ChainReport(ReportHeader):
    delta: int
    x: int
    params: SiegelParams
    shifts: ShiftSystem
    line_labels: list[str]
    lines: list[float] = Field(..., min_length=5, max_length=5)
    singular_series: SingularSeries
    gaps: list[ChainGap]
    middle_window_empty: bool
    timings: dict[str, float] = Field(default_factory=dict, exclude=True)


class ExceptionalBand(BaseModel):
    m: int = Field(..., ge=2)
    lower: float
    upper: float
    value: float = Field(..., ge=0.0)
    comparator: float


class ExceptionalSumReport(BaseModel):
    delta: int
    x: int
    eps: float
    eta: QualityProxy
    lower: float = Field(..., description="q^((1+eps)/2)")
    lhs: float = Field(..., ge=0.0)
    comparator: float = Field(..., description="log_q(x) / eta_hat, diagnostic only")
    bands: list[ExceptionalBand] = Field(default_factory=list)


class CharReport(ReportHeader):
    delta: int
    conductor: int
    L1: float
    Lprime1: float
    eta: QualityProxy
    exceptional_sums: list[ExceptionalSumReport]


class NuSieveReport(BaseModel):
    lhs: float
    skeleton: dict[int, float] = Field(..., description="C -> tau(D)^C / (D log^k R)")
    ratios: dict[int, float]


class LiouvilleErrorReport(BaseModel):
    limit: int
    x: int
    R: float
    mismatches: int = Field(..., description="n with lambda(n) != lambda_Siegel(n)")
    uncovered: int = Field(..., description="mismatches whose right-hand side vanishes")
    max_ratio: float = Field(..., description="max |lambda - lambda_Siegel| / rhs over rhs > 0")


class LDScanResult(ReportHeader):
    delta: int
    x: int
    q: int
    a: int
    lo: int
    hi: int
    terms: int
    value: float
    trivial_bound: float
    ratio: float | None = None
    weights: list[float] | None = Field(None, description="q_chi-periodic weight table; None means f = 1")


class CharShiftResult(BaseModel):
    value: float
    skeleton: float
    ratio: float


Command = Literal["sieve", "char", "approx", "correlate", "chain", "expsum", "ld-scan", "selftest"]


class RunConfig(BaseModel):
    """Validated per-run configuration; echoed verbatim into reports."""

    model_config = ConfigDict(extra="forbid")

    command: Command
    x: IntList = Field(default_factory=lambda: [10**6], description="x or an x-sweep")
    delta: IntLike | None = None
    k: IntLike | None = None
    shifts: IntList = Field(default_factory=list)
    shifts_prime: IntList = Field(default_factory=list)
    eta: float | None = Field(None, description="User-supplied quality (>= 10)")
    R: float | None = Field(None, gt=1.0)
    D: float | None = Field(None, gt=1.0)
    R0: float | None = Field(None, gt=1.0)
    eps0: float = Field(0.5, gt=0.0, lt=1.0)
    eps: float = Field(0.1, gt=0.0, lt=1.0)
    window_size: IntLike | None = None
    threads: IntLike | None = None
    quad_tol: float | None = Field(None, gt=0.0)
    factors: StrList = Field(default_factory=list)
    weights: StrList = Field(
        default_factory=list, description="ld-scan weight table: q_chi values in [-1, 1], or 'chi'"
    )
    series_cutoff: IntLike = 10**6
    lo: IntLike = 1
    hi: IntLike | None = None
    q: IntLike | None = None
    a: IntLike = 0
    q0: IntLike = 1
    u1: IntLike = 1
    u2: IntLike = 1
    mode: Literal["kloosterman", "scan", "hyperbola", "mfe", "weil"] = "kloosterman"
    max_q: IntLike = 200
    table: Literal["b", "a", "c"] = "b"
    quick: bool = False
    format: Literal["json", "csv"] | None = None
    out: str | None = None

    @field_validator("x")
    @classmethod
    def _positive_x(cls, value: list[int]) -> list[int]:
        if not value or any(v < 1 for v in value):
            raise ValueError("x must be a non-empty list of positive integers")
        return value

    @field_validator("factors")
    @classmethod
    def _factor_syntax(cls, value: list[str]) -> list[str]:
        for item in value:
            name, sep, shift = item.partition(":")
            if not sep or not name or not shift.strip().isdigit():
                raise ValueError(f"factor {item!r} must look like name:shift")
        return value

    @field_validator("weights")
    @classmethod
    def _weight_syntax(cls, value: list[str]) -> list[str]:
        if value == ["chi"]:
            return value
        for item in value:
            try:
                float(item)
            except ValueError:
                raise ValueError(f"weight {item!r} is neither a number nor 'chi'") from None
        return value

    @model_validator(mode="after")
    def _check_ranges(self) -> "RunConfig":
        if self.k is not None and self.k != len(self.shifts):
            raise ValueError(f"k={self.k} but {len(self.shifts)} shifts were given")
        positive = {
            "window_size": self.window_size,
            "threads": self.threads,
            "lo": self.lo,
            "hi": self.hi,
            "q": self.q,
            "q0": self.q0,
            "max_q": self.max_q,
        }
        for name, value in positive.items():
            if value is not None and value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")
        if self.threads is not None and self.threads > 256:
            raise ValueError("threads must be <= 256")
        if self.series_cutoff < 4:
            raise ValueError("series_cutoff must be >= 4")
        if self.max_q > 2000:
            raise ValueError("max_q must be <= 2000")
        return self


class SieveSummary(ReportHeader):
    lo: int
    hi: int
    liouville_sum: int
    mobius_sum: int
    chebyshev_psi: float
    divisor_sum: int


class CoeffTable(ReportHeader):
    table: Literal["b", "a", "c"]
    cutoff: float
    l1_norm: float = Field(..., description="sum |c_d| / d")
    rows: list[tuple[int, float]]


class CorrelationRow(BaseModel):
    x: int
    value: float
    params: SiegelParams | None = Field(None, description="Scales at this x when model functions are used")


class CorrelationReport(ReportHeader):
    factors: list[str]
    rows: list[CorrelationRow]


class ChainSweep(ReportHeader):
    reports: list[ChainReport]


class ExpSumReport(ReportHeader):
    mode: str
    rows: list[dict[str, Any]]

from __future__ import annotations

import argparse
import logging
import sys
import time
from typing import Any

import numpy as np
from dotenv import dotenv_values
from pydantic import BaseModel, ValidationError

from . import __version__
from .approximants import ApproximantBank, lambda_sharp_coeffs, psi_big_coeffs, siegel_params
from .config import get_settings
from .correlations import (
    chain_report,
    chain_rows,
    correlate_named,
    level_of_distribution_scan,
    parse_factor,
)
from .errors import ComputationError, ConfigError, PreconditionError
from .exp_sums import (
    PeriodicWeight,
    estermann_bound,
    estermann_max_ratio,
    hyperbola_bound,
    hyperbola_fourier_coeff,
    kloosterman,
    mfe_decompose,
    weil_interval_bound,
    weil_interval_sum,
)
from .quad_char import QuadChar, exceptional_sum_report, l_one, l_prime_one, quality_proxy
from .schemas import (
    ChainSweep,
    CharReport,
    CoeffTable,
    CorrelationReport,
    CorrelationRow,
    ExpSumReport,
    QualityProxy,
    RunConfig,
    ShiftSystem,
    SieveSummary,
    SiegelParams,
)
from .selberg import nu_weights
from .smoothing import cutoff_fingerprint
from .storage import load_or_build_window, write_csv_report, write_json_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPUTATION = 3
EXIT_SELFTEST = 4
EXIT_INTERRUPTED = 130


def _opt(parser: argparse.ArgumentParser, *names: str, **kwargs: Any) -> None:
    """Optional flag that is absent from the namespace unless given."""
    parser.add_argument(*names, default=argparse.SUPPRESS, **kwargs)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _opt(common, "--config", dest="config_file", help="key=value file merged under command-line flags")
    _opt(common, "--out", help="Output path ('-' for stdout; default: timestamped file)")
    _opt(common, "--format", choices=["json", "csv"], help="Report format")
    _opt(common, "-v", "--verbose", action="store_true", help="Debug logging")
    _opt(common, "--window-size", dest="window_size", help="Entries per sieved window")
    _opt(common, "--threads", help="Worker threads for windowed sums")
    _opt(common, "--quad-tol", dest="quad_tol", type=float, help="Quadrature tolerance")

    model = argparse.ArgumentParser(add_help=False)
    _opt(model, "--x", help="x, or a comma-separated x-sweep (1e6 notation accepted)")
    _opt(model, "--delta", help="Fundamental discriminant of the character")
    _opt(model, "--eta", type=float, help="Quality override (>= 10)")
    _opt(model, "--R", dest="R", type=float, help="Override for R")
    _opt(model, "--D", dest="D", type=float, help="Override for D")
    _opt(model, "--R0", dest="R0", type=float, help="Override for R0")
    _opt(model, "--eps0", type=float, help="Exponent eps0 in (0, 1)")
    _opt(model, "--shifts", help="Comma-separated shifts h_1..h_k")
    _opt(model, "--shifts-prime", dest="shifts_prime", help="Comma-separated shifts h'_1..h'_l")
    _opt(model, "--k", help="Number of von Mangoldt factors (checked against --shifts)")

    parser = argparse.ArgumentParser(
        prog="siegel-lab",
        description="Numerical lab for Siegel-model approximations to prime and Liouville correlations.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command")

    p_sieve = sub.add_parser("sieve", parents=[common], help="Sieve a window of base functions")
    _opt(p_sieve, "--lo", help="First n (default 1)")
    _opt(p_sieve, "--hi", help="Last n")

    p_char = sub.add_parser("char", parents=[common, model], help="L(1, chi), quality proxy, exceptional sums")
    _opt(p_char, "--eps", type=float, help="Exponent eps for the exceptional sums")

    p_approx = sub.add_parser("approx", parents=[common, model], help="Dump b_d, a_d or c_d coefficients")
    _opt(p_approx, "--table", choices=["b", "a", "c"], help="b: lambda_sharp, a: Selberg, c: chi*log sharp")

    p_corr = sub.add_parser("correlate", parents=[common, model], help="Raw correlation averages")
    _opt(p_corr, "--factors", help="Comma-separated name:shift list, e.g. lambda:0,lambda:1")

    p_chain = sub.add_parser("chain", parents=[common, model], help="Five-line chain evaluator")
    _opt(p_chain, "--series-cutoff", dest="series_cutoff", help="Prime cutoff for the singular series")

    p_exp = sub.add_parser("expsum", parents=[common, model], help="Kloosterman and hyperbola sums")
    _opt(p_exp, "--mode", choices=["kloosterman", "scan", "hyperbola", "mfe", "weil"])
    for flag in ("--q", "--a", "--q0", "--u1", "--u2", "--max-q", "--lo", "--hi"):
        _opt(p_exp, flag, dest=flag[2:].replace("-", "_"))

    p_ld = sub.add_parser("ld-scan", parents=[common, model], help="Residue-class sums of the flat part")
    for flag in ("--q", "--a", "--lo", "--hi"):
        _opt(p_ld, flag, dest=flag[2:])
    _opt(p_ld, "--weights", help="q_chi comma-separated values in [-1, 1] (write --weights=-1,...), or 'chi'")

    p_self = sub.add_parser("selftest", parents=[common], help="Run the acceptance suite")
    _opt(p_self, "--quick", action="store_true", help="Reduced scales")
    return parser


def _load_config(args: argparse.Namespace) -> RunConfig:
    values: dict[str, Any] = {}
    flags = vars(args).copy()
    path = flags.pop("config_file", None)
    flags.pop("verbose", None)
    if path:
        raw = dotenv_values(path)
        values.update({k.strip().lower().replace("-", "_"): v for k, v in raw.items() if v is not None})
    values.update(flags)
    return RunConfig(**values)


def _configure_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else getattr(logging, get_settings().SIEGEL_LAB_LOG_LEVEL.upper())
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _echo(config: RunConfig) -> dict[str, Any]:
    """Every field that can change a result; thread count and output path cannot."""
    return config.model_dump(mode="json", exclude={"threads", "out"})


def _header(
    config: RunConfig, params: SiegelParams | None = None, eta: QualityProxy | None = None
) -> dict[str, Any]:
    """Keyword arguments for ReportHeader."""
    if eta is None and params is not None:
        eta = params.eta
    return {
        "software_version": __version__,
        "cutoff_fingerprint": cutoff_fingerprint(),
        "params": params,
        "eta": eta,
        "config": _echo(config),
    }


def _emit(
    config: RunConfig,
    slug: str,
    report: BaseModel | None,
    rows: list[dict[str, Any]] | None,
    default: str,
    meta: dict[str, Any] | None = None,
) -> None:
    fmt = config.format or default
    if fmt == "csv" and rows is not None:
        path = write_csv_report(config.command, slug, rows, config.out)
    elif report is not None:
        path = write_json_report(config.command, slug, report, config.out, meta=meta)
    else:
        raise PreconditionError(f"'{config.command}' cannot be written as {fmt}")
    if path != "-":
        print(path)


def _require_delta(config: RunConfig) -> QuadChar:
    if config.delta is None:
        raise PreconditionError(f"'{config.command}' needs --delta")
    return QuadChar(config.delta)


def _params(config: RunConfig, chi: QuadChar, x: int) -> SiegelParams:
    eta = quality_proxy(chi, config.eta)
    return siegel_params(
        x,
        k=len(config.shifts),
        ell=len(config.shifts_prime),
        eps0=config.eps0,
        eta=eta,
        R=config.R,
        D=config.D,
        R0=config.R0,
    )


def _run_sieve(config: RunConfig) -> int:
    lo = config.lo
    hi = config.hi if config.hi is not None else config.x[0]
    table = load_or_build_window(lo, hi)
    rows = [
        {"n": n, "liouville": lv, "mangoldt": mg, "mu": mu, "tau": tau, "spf": spf}
        for n, lv, mg, mu, tau, spf in zip(
            table.ns.tolist(),
            table.liouville.tolist(),
            table.mangoldt.tolist(),
            table.mu.tolist(),
            table.tau.tolist(),
            table.spf.tolist(),
        )
    ]
    summary = SieveSummary(
        **_header(config),
        lo=lo,
        hi=hi,
        liouville_sum=int(table.liouville.astype(np.int64).sum()),
        mobius_sum=int(table.mu.astype(np.int64).sum()),
        chebyshev_psi=float(np.sum(table.mangoldt)),
        divisor_sum=int(table.tau.sum()),
    )
    _emit(config, f"{lo} {hi}", summary, rows, "csv")
    return EXIT_OK


def _run_char(config: RunConfig) -> int:
    chi = _require_delta(config)
    eta = quality_proxy(chi, config.eta)
    sums = [exceptional_sum_report(chi, x, config.eps, eta) for x in config.x]
    report = CharReport(
        **_header(config, eta=eta),
        delta=chi.delta,
        conductor=chi.conductor,
        L1=l_one(chi),
        Lprime1=l_prime_one(chi),
        exceptional_sums=sums,
    )
    rows = [{"x": s.x, "lower": s.lower, "lhs": s.lhs, "comparator": s.comparator} for s in sums]
    _emit(config, f"delta {chi.delta}", report, rows, "json")
    return EXIT_OK


def _run_approx(config: RunConfig) -> int:
    chi = _require_delta(config)
    params = _params(config, chi, config.x[0])
    if config.table == "b":
        coeffs = lambda_sharp_coeffs(params.R.value, params.D.value, chi)
    elif config.table == "a":
        coeffs = nu_weights(params.R.value)
    else:
        coeffs = psi_big_coeffs(params, chi, config.quad_tol)[1]
    rows = coeffs.rows()
    report = CoeffTable(
        **_header(config, params),
        table=config.table,
        cutoff=coeffs.cutoff,
        l1_norm=coeffs.l1_norm(),
        rows=rows,
    )
    csv_rows = [{"d": d, "value": value} for d, value in rows]
    _emit(config, f"{config.table} delta {chi.delta} x {params.x}", report, csv_rows, "csv")
    return EXIT_OK


def _run_correlate(config: RunConfig) -> int:
    if not config.factors:
        raise PreconditionError("'correlate' needs --factors")
    factors = [parse_factor(item) for item in config.factors]
    chi = QuadChar(config.delta) if config.delta is not None else None
    results = []
    for x in config.x:
        params = _params(config, chi, x) if chi is not None else None
        bank = ApproximantBank(chi=chi, params=params, quad_tol=config.quad_tol)
        value = correlate_named(x, factors, bank, config.window_size, config.threads)
        logger.info("E_{n<=%d} %s = %.12g", x, ",".join(config.factors), value)
        results.append(CorrelationRow(x=x, value=value, params=params))
    eta = results[0].params.eta if chi is not None else None
    report = CorrelationReport(**_header(config, eta=eta), factors=config.factors, rows=results)
    rows = [{"x": r.x, "factors": " ".join(config.factors), "value": r.value} for r in results]
    _emit(config, " ".join(config.factors), report, rows, "csv")
    return EXIT_OK


def _run_chain(config: RunConfig) -> int:
    chi = _require_delta(config)
    shifts = ShiftSystem(h=config.shifts, h_prime=config.shifts_prime)
    started = time.perf_counter()
    reports = [
        chain_report(
            _params(config, chi, x),
            shifts,
            chi,
            series_cutoff=config.series_cutoff,
            window_size=config.window_size,
            threads=config.threads,
            quad_tol=config.quad_tol,
            config=_echo(config),
        )
        for x in config.x
    ]
    meta = {
        "elapsed_seconds": time.perf_counter() - started,
        "timings": [r.timings for r in reports],
    }
    slug = f"delta {chi.delta} x {config.x[0]}"
    if len(reports) == 1:
        _emit(config, slug, reports[0], chain_rows(reports), "json", meta=meta)
    else:
        sweep = ChainSweep(**_header(config, eta=reports[0].params.eta), reports=reports)
        _emit(config, slug, sweep, chain_rows(reports), "csv", meta=meta)
    return EXIT_OK


def _expsum_rows(config: RunConfig) -> list[dict[str, Any]]:
    mode = config.mode
    if mode == "scan":
        rows = []
        for q in range(1, config.max_q + 1):
            rows.append({"q": q, "max_ratio": estermann_max_ratio(q)})
        return rows
    if mode == "weil":
        chi = _require_delta(config)
        if len(config.shifts) != 2:
            raise PreconditionError("'weil' mode needs exactly two --shifts")
        h1, h2 = config.shifts
        hi = config.hi if config.hi is not None else config.lo + chi.conductor - 1
        value = weil_interval_sum(chi, h1, h2, config.lo, hi)
        bound = weil_interval_bound(chi, h1, h2, hi - config.lo + 1)
        return [{"delta": chi.delta, "h1": h1, "h2": h2, "lo": config.lo, "hi": hi, "value": value,
                 "bound": bound, "ratio": abs(value) / bound}]
    if config.q is None:
        raise PreconditionError(f"'{mode}' mode needs --q")
    q = config.q
    if mode == "kloosterman":
        value = kloosterman(config.u1, config.u2, q)
        bound = estermann_bound(config.u1, config.u2, q)
        return [{"q": q, "u1": config.u1, "u2": config.u2, "real": value.real, "imag": value.imag,
                 "bound": bound, "ratio": abs(value) / bound}]
    weight = PeriodicWeight.constant()
    if mode == "hyperbola":
        value = hyperbola_fourier_coeff(q, config.a, config.q0, weight, config.u1, config.u2)
        bound = hyperbola_bound(q, config.q0, config.u1, config.u2)
        return [{"q": q, "a": config.a, "q0": config.q0, "u1": config.u1, "u2": config.u2,
                 "real": value.real, "imag": value.imag, "bound": bound, "ratio": abs(value) / bound}]
    decomposition = mfe_decompose(q, config.a, config.q0, weight)
    return [{"q": q, "a": config.a, "q0": config.q0, "q0_prime": decomposition.q0_prime,
             "alpha": decomposition.alpha, "identity_residual": decomposition.identity_residual,
             "excluded_max": decomposition.excluded_max, "max_bound_ratio": decomposition.max_bound_ratio()}]


def _run_expsum(config: RunConfig) -> int:
    rows = _expsum_rows(config)
    report = ExpSumReport(**_header(config), mode=config.mode, rows=rows)
    _emit(config, f"{config.mode} q {config.q or config.max_q}", report, rows, "csv" if config.mode == "scan" else "json")
    return EXIT_OK


def _run_ld_scan(config: RunConfig) -> int:
    chi = _require_delta(config)
    if config.q is None:
        raise PreconditionError("'ld-scan' needs --q")
    x = config.x[0]
    params = _params(config, chi, x)
    hi = config.hi if config.hi is not None else x
    weights = None
    if config.weights == ["chi"]:
        weights = chi.table.astype(float).tolist()
    elif config.weights:
        weights = [float(w) for w in config.weights]
    result = level_of_distribution_scan(
        params,
        chi,
        config.q,
        config.a,
        config.lo,
        hi,
        weights=weights,
        quad_tol=config.quad_tol,
        config=_echo(config),
    )
    row = result.model_dump(exclude={"config", "params", "eta", "weights"})
    _emit(config, f"delta {chi.delta} q {config.q} a {config.a}", result, [row], "json")
    return EXIT_OK


def _run_selftest(config: RunConfig) -> int:
    from .selftest import run_all_tests

    return EXIT_OK if run_all_tests(quick=config.quick) else EXIT_SELFTEST


_COMMANDS = {
    "sieve": _run_sieve,
    "char": _run_char,
    "approx": _run_approx,
    "correlate": _run_correlate,
    "chain": _run_chain,
    "expsum": _run_expsum,
    "ld-scan": _run_ld_scan,
    "selftest": _run_selftest,
}


def run(config: RunConfig) -> int:
    """Dispatch a validated configuration to its subcommand."""
    return _COMMANDS[config.command](config)


def main(argv: list[str] | None = None) -> int:
    """Parse argv, run one subcommand and map failures to exit codes.

    Returns:
        0 on success, 2 for bad input, 3 for a failed computation, 4 for a
        failed selftest, 130 on interrupt and 1 for anything unexpected.
    """
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return EXIT_CONFIG

    _configure_logging(getattr(args, "verbose", False))
    try:
        config = _load_config(args)
        return run(config)
    except KeyboardInterrupt:
        print("\nCancelled by user", file=sys.stderr)
        return EXIT_INTERRUPTED
    except (ConfigError, ValidationError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ComputationError as e:
        logger.exception("Computation failed: %s", e, exc_info=True)
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_COMPUTATION
    except Exception as e:
        logger.exception("Unexpected failure: %s", e, exc_info=True)
        print(f"Error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

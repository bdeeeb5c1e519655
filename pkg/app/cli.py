"""Command-line interface: ``python -m app <subcommand>``.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
Values from ``--config file.json`` are overridden by flags given on the command line.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from app.core.config import SUPPORTED_KERNELS, Settings, get_settings
from app.core.errors import ConfigError, HyperApproxError
from app.core.logging import get_logger, set_level
from app.services.analysis.bounds import BoundStatus, check_stability_bound
from app.services.analysis.configs import TEST_FUNCTIONS
from app.services.analysis.experiments import (
    SWEEP_FACTORS,
    TABLE_COLUMNS,
    run_interval_singular_sweep,
    run_sphere_singular_sweep,
    run_table,
    table_configs,
)
from app.services.analysis.figures import write_sweep_svg
from app.services.analysis.report_store import ReportStore
from app.services.analysis.selftest import run_selftest
from app.services.connection import alpha_for
from app.services.kernels import KernelDescriptor, SphereLog, build_kernel
from app.services.moments import compute_moments, moments_sphere_log
from app.services.orthopoly import RegionKind
from app.services.quadrature import (
    QuadratureRule,
    estimate_mz_eta,
    gauss_legendre,
    load_spherical_design,
    sphere_product_rule,
    verify_exactness,
)

logger = get_logger(__name__)


def _split(value: Any, cast) -> Any:
    if value is None or isinstance(value, (list, tuple)):
        return value
    items = [item.strip() for item in str(value).split(",") if item.strip()]
    return [cast(item) for item in items]


class CliConfig(BaseModel):
    """Merged view of a JSON config file and command-line flags."""

    model_config = ConfigDict(extra="forbid")

    region: RegionKind = RegionKind.INTERVAL
    kernel: Optional[str] = None
    kappa: Optional[float] = None
    a: Optional[float] = None
    nu: Optional[float] = None
    nu1: Optional[float] = None
    nu2: Optional[float] = None
    xi: Optional[Tuple[float, float, float]] = None
    lbar: Optional[int] = None
    kbar: Optional[int] = None
    f: Optional[str] = None
    norm: Literal["L1", "L2"] = "L2"
    n_list: Optional[List[int]] = None
    m_list: Optional[List[int]] = None
    factor: float = SWEEP_FACTORS[0]
    n: Optional[int] = None
    max_r: Optional[int] = None
    log_form: Literal["printed", "funk_hecke"] = "funk_hecke"
    rule: Optional[str] = None
    degree: Optional[int] = None
    out: Optional[str] = None
    svg: Optional[str] = None
    designs: Optional[str] = None
    audit: bool = False
    jobs: Optional[int] = None
    log_level: Optional[Literal["DEBUG", "INFO", "WARNING", "ERROR"]] = None
    host: str = "0.0.0.0"
    port: int = 8000

    @field_validator("n_list", "m_list", mode="before")
    @classmethod
    def _int_list(cls, value: Any) -> Any:
        parsed = _split(value, int)
        if parsed is not None and not parsed:
            raise ValueError("list must not be empty")
        return parsed

    @field_validator("xi", mode="before")
    @classmethod
    def _point(cls, value: Any) -> Any:
        return _split(value, float)

    @field_validator("kernel")
    @classmethod
    def _known_kernel(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value not in SUPPORTED_KERNELS:
            raise ValueError(f"unknown kernel '{value}', expected one of {', '.join(SUPPORTED_KERNELS)}")
        return value

    @field_validator("f")
    @classmethod
    def _known_function(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value not in TEST_FUNCTIONS:
            raise ValueError(f"unknown test function '{value}'")
        return value


def _add_kernel_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--region", choices=[r.value for r in RegionKind])
    parser.add_argument("--kernel", help=f"one of: {', '.join(SUPPORTED_KERNELS)}")
    parser.add_argument("--kappa", type=float)
    parser.add_argument("--a", type=float, help="exponent of the interval algebraic kernels")
    parser.add_argument("--nu", type=float)
    parser.add_argument("--nu1", type=float)
    parser.add_argument("--nu2", type=float)
    parser.add_argument("--xi", help="singular point x,y,z on the sphere")
    parser.add_argument("--lbar", type=int)
    parser.add_argument("--kbar", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyperapprox", description="Classical and efficient hyperinterpolation")
    parser.add_argument("--config", help="JSON file with default values for the flags")
    parser.add_argument("--jobs", type=int, help="parallel experiment rows (default: logical cores)")
    parser.add_argument("--log-level", dest="log_level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    table = sub.add_parser("table", help="error table over an (n, m) grid")
    _add_kernel_flags(table)
    table.add_argument("--f", choices=sorted(TEST_FUNCTIONS))
    table.add_argument("--norm", choices=["L1", "L2"])
    table.add_argument("--n-list", dest="n_list")
    table.add_argument("--m-list", dest="m_list")
    table.add_argument("--out")
    table.add_argument("--designs")
    table.add_argument("--audit", action="store_true", default=None, help="also audit both stability bounds")

    sweep = sub.add_parser("sweep", help="singular-kernel error sweep over n")
    _add_kernel_flags(sweep)
    sweep.add_argument("--f", choices=sorted(TEST_FUNCTIONS))
    sweep.add_argument("--factor", type=float, help=f"rule-size factor, tabulated values {SWEEP_FACTORS}")
    sweep.add_argument("--n-list", dest="n_list")
    sweep.add_argument("--out")
    sweep.add_argument("--svg")
    sweep.add_argument("--designs")

    moments = sub.add_parser("moments", help="dump modified moments as CSV")
    _add_kernel_flags(moments)
    moments.add_argument("--max-r", dest="max_r", type=int)
    moments.add_argument("--log-form", dest="log_form", choices=["printed", "funk_hecke"])
    moments.add_argument("--out")

    alpha = sub.add_parser("alpha", help="dump the kernel-weighted Gram matrix alpha as CSV")
    _add_kernel_flags(alpha)
    alpha.add_argument("--n", type=int)
    alpha.add_argument("--out")

    validate = sub.add_parser("validate", help="exactness defect and MZ eta of a rule")
    validate.add_argument("--rule", help="gl:<m> | sphere:<t> | design:<path>:<t>")
    validate.add_argument("--degree", type=int)
    validate.add_argument("--n", type=int, help="degree for the MZ estimate (default: degree // 2)")

    sub.add_parser("selftest", help="run the invariant suite")

    serve = sub.add_parser("serve", help="start the HTTP API")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    return parser


def load_config(args: argparse.Namespace) -> CliConfig:
    """File values first, then every flag that was given."""
    values: Dict[str, Any] = {}
    if args.config:
        path = Path(args.config)
        try:
            loaded = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ConfigError(f"config file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        values.update(loaded)
    flags = {k: v for k, v in vars(args).items() if k not in ("config", "command") and v is not None}
    values.update(flags)
    return CliConfig.model_validate(values)


def _settings_for(config: CliConfig) -> Settings:
    settings = get_settings()
    update: Dict[str, Any] = {}
    if config.jobs is not None:
        update["jobs"] = max(1, config.jobs)
    if config.designs is not None:
        update["designs_dir"] = config.designs
    return settings.model_copy(update=update) if update else settings


def kernel_from(config: CliConfig) -> KernelDescriptor:
    if config.kernel is None:
        raise ConfigError("--kernel is required")
    return build_kernel(
        config.kernel,
        config.region,
        kappa=config.kappa,
        a=config.a,
        nu=config.nu,
        nu1=config.nu1,
        nu2=config.nu2,
        xi=config.xi,
        lbar=config.lbar,
        kbar=config.kbar,
    )


def parse_rule(spec: str) -> QuadratureRule:
    """``gl:<m>``, ``sphere:<t>`` or ``design:<path>:<t>``."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "gl":
            return gauss_legendre(int(rest))
        if kind == "sphere":
            return sphere_product_rule(int(rest))
        if kind == "design":
            path, _, t = rest.rpartition(":")
            return load_spherical_design(path, int(t))
    except ValueError as e:
        if isinstance(e, HyperApproxError):
            raise
        raise ConfigError(f"malformed rule spec '{spec}': {e}") from e
    raise ConfigError(f"unknown rule kind in '{spec}', expected gl:, sphere: or design:")


def _require(value: Any, flag: str) -> Any:
    if value is None:
        raise ConfigError(f"{flag} is required")
    return value


def cmd_table(config: CliConfig, settings: Settings) -> int:
    n_list = _require(config.n_list, "--n-list")
    m_list = _require(config.m_list, "--m-list")
    kernel = kernel_from(config)
    rows = run_table(
        kernel,
        n_list,
        m_list,
        f=config.f,
        norm=config.norm,
        designs_dir=settings.designs_dir,
        jobs=settings.jobs,
        settings=settings,
    )
    path = ReportStore(settings).write_table(rows, config.out, name=f"table_{kernel.label}")
    for row in rows:
        record = row.csv_row()
        print(" ".join(f"{key}={record[key]}" for key in TABLE_COLUMNS if key != "seconds"))
    print(f"wrote {path}")

    if config.audit:
        theorems = ["thm1"] + (["thm3"] if kernel.sup_norm() is not None else [])
        failed = 0
        for experiment in table_configs(
            kernel, n_list, m_list, f=config.f, norm=config.norm, designs_dir=settings.designs_dir
        ):
            for theorem in theorems:
                report = check_stability_bound(experiment, theorem, settings)
                failed += report.status is BoundStatus.FAIL
                print(
                    f"audit {theorem} n={report.n} m={report.m} eta={report.eta:.3e} "
                    f"status={report.status.value} margin={report.margin}"
                )
        if failed:
            print(f"{failed} stability checks failed", file=sys.stderr)
            return 3
    return 0


def cmd_sweep(config: CliConfig, settings: Settings) -> int:
    kernel = kernel_from(config)
    options: Dict[str, Any] = {"jobs": settings.jobs, "settings": settings}
    if config.n_list is not None:
        options["n_values"] = config.n_list
    if config.f is not None:
        options["f"] = config.f
    if kernel.region.kind is RegionKind.INTERVAL:
        rows = run_interval_singular_sweep(kernel, config.factor, **options)
    else:
        rows = run_sphere_singular_sweep(kernel, config.factor, designs_dir=settings.designs_dir, **options)

    path = ReportStore(settings).write_table(rows, config.out, name=f"sweep_{kernel.label}_{config.factor:g}")
    svg = Path(config.svg) if config.svg else path.with_suffix(".svg")
    write_sweep_svg(rows, svg, title=f"{kernel.label} {kernel.parameter_label} factor={config.factor:g}")
    print(f"wrote {path}")
    print(f"wrote {svg}")
    return 0


def cmd_moments(config: CliConfig, settings: Settings) -> int:
    kernel = kernel_from(config)
    max_r = _require(config.max_r, "--max-r")
    if isinstance(kernel, SphereLog) and config.log_form != "funk_hecke":
        moments = moments_sphere_log(kernel.xi, max_r, form=config.log_form, tolerance=settings.moment_tolerance)
    else:
        moments = compute_moments(kernel, max_r, settings.moment_tolerance)
    out = config.out or str(Path(settings.output_folder) / f"moments_{kernel.label}_{max_r}.csv")
    path = moments.write_csv(out)
    print(f"wrote {path} ({len(moments.values)} moments)")
    return 0


def cmd_alpha(config: CliConfig, settings: Settings) -> int:
    kernel = kernel_from(config)
    n = _require(config.n, "--n")
    alpha = alpha_for(kernel, n, settings.moment_tolerance)
    out = config.out or str(Path(settings.output_folder) / f"alpha_{kernel.label}_n{n}.csv")
    path = alpha.write_csv(out)
    print(f"A_n={alpha.A_n!r}")
    print(f"wrote {path}")
    return 0


def cmd_validate(config: CliConfig, settings: Settings) -> int:
    rule = parse_rule(_require(config.rule, "--rule"))
    degree = _require(config.degree, "--degree")
    n = config.n if config.n is not None else degree // 2
    defect = verify_exactness(rule, degree)
    estimate = estimate_mz_eta(rule, n)
    report = {
        "rule": rule.source,
        "m": rule.m,
        "degree": degree,
        "defect": defect,
        "n": n,
        "eta": estimate.eta,
        "rank_deficient": estimate.rank_deficient,
    }
    print(json.dumps(report, indent=2))
    return 0


def cmd_selftest(config: CliConfig, settings: Settings) -> int:
    results = run_selftest(settings)
    for result in results:
        status = "ok" if result.passed else "FAIL"
        print(f"{status:4} {result.name} value={result.value} threshold={result.threshold} {result.detail}".rstrip())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 3


def cmd_serve(config: CliConfig, settings: Settings) -> int:
    import uvicorn

    uvicorn.run("app.main:app", host=config.host, port=config.port)
    return 0


HANDLERS = {
    "table": cmd_table,
    "sweep": cmd_sweep,
    "moments": cmd_moments,
    "alpha": cmd_alpha,
    "validate": cmd_validate,
    "selftest": cmd_selftest,
    "serve": cmd_serve,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args)
        settings = _settings_for(config)
        set_level(config.log_level or settings.log_level)
        return HANDLERS[args.command](config, settings)
    except ValidationError as e:
        print(f"error: invalid configuration: {e}", file=sys.stderr)
        return 2
    except HyperApproxError as e:
        logger.error("Command failed | command=%s | error=%s", args.command, e)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())

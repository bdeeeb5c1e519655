"""Error norms, stability audits and the experiment harness."""

from .bounds import BoundReport, BoundStatus, audit_stability, check_stability_bound
from .configs import TEST_FUNCTIONS, ExperimentConfig, resolve_rule, function_by_name
from .experiments import (
    TABLE_COLUMNS,
    ErrorRow,
    run_configs,
    run_interval_singular_sweep,
    run_interval_table,
    run_row,
    run_sphere_singular_sweep,
    run_sphere_table,
    run_table,
)
from .reference import error_norm, reference_rule
from .report_store import ReportStore
from .selftest import SelftestResult, run_selftest

__all__ = [
    "BoundReport",
    "BoundStatus",
    "ErrorRow",
    "ExperimentConfig",
    "ReportStore",
    "SelftestResult",
    "TABLE_COLUMNS",
    "TEST_FUNCTIONS",
    "audit_stability",
    "check_stability_bound",
    "error_norm",
    "reference_rule",
    "resolve_rule",
    "run_configs",
    "run_interval_singular_sweep",
    "run_interval_table",
    "run_row",
    "run_selftest",
    "run_sphere_singular_sweep",
    "run_sphere_table",
    "run_table",
    "function_by_name",
]

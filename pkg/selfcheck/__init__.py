"""Oracle-backed self-checks of the numerical core."""

from .runner import resolve_suites, run_selfcheck, run_suites
from .spec import SelfCheckOptions, SelfCheckReport, SuiteResult
from .suites import SUITES, Outcome, Suite, suite

__all__ = [
    "SUITES",
    "Outcome",
    "SelfCheckOptions",
    "SelfCheckReport",
    "Suite",
    "SuiteResult",
    "resolve_suites",
    "run_selfcheck",
    "run_suites",
    "suite",
]

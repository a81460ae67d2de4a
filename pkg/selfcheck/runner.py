"""Run self-check suites concurrently.

Suites run in worker threads via asyncio.gather; results are reduced in registry order,
so the report does not depend on which suite finishes first.
"""

import asyncio
import logging
from collections.abc import Iterable

from .spec import SelfCheckOptions, SelfCheckReport, SuiteResult
from .suites import SUITES

logger = logging.getLogger(__name__)


def resolve_suites(names: Iterable[str] | None = None) -> list[str]:
    """Registry order, optionally restricted to ``names``; unknown names raise KeyError."""
    if not names:
        return list(SUITES)
    wanted = list(dict.fromkeys(names))
    unknown = [n for n in wanted if n not in SUITES]
    if unknown:
        raise KeyError(f"Unknown suite(s): {', '.join(unknown)}. Available: {', '.join(SUITES)}")
    return [n for n in SUITES if n in wanted]


async def run_suites(names: Iterable[str] | None = None, options: SelfCheckOptions | None = None) -> SelfCheckReport:
    """Run the selected suites concurrently and collect a report."""
    options = options or SelfCheckOptions()
    selected = resolve_suites(names)
    coros = [asyncio.to_thread(SUITES[name].run, options) for name in selected]
    outcomes = await asyncio.gather(*coros, return_exceptions=True)

    results: list[SuiteResult] = []
    for name, outcome in zip(selected, outcomes, strict=True):
        if isinstance(outcome, BaseException):
            logger.error("  FAIL: %s raised %s: %s", name, type(outcome).__name__, outcome)
            results.append(
                SuiteResult(
                    name=name,
                    passed=False,
                    max_deviation=float("inf"),
                    tolerance=SUITES[name].tolerance,
                    cases=0,
                    error=f"{type(outcome).__name__}: {outcome}",
                )
            )
            continue
        if outcome.passed:
            logger.info("  PASS: %s (max deviation %.3e <= %.1e)", name, outcome.max_deviation, outcome.tolerance)
        else:
            logger.error("  FAIL: %s (max deviation %.3e > %.1e)", name, outcome.max_deviation, outcome.tolerance)
        results.append(outcome)
    return SelfCheckReport(results=tuple(results))


def run_selfcheck(names: Iterable[str] | None = None, options: SelfCheckOptions | None = None) -> SelfCheckReport:
    """Synchronous entry point."""
    return asyncio.run(run_suites(names, options))

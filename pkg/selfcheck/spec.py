"""Self-check result types."""

import logging
from dataclasses import dataclass, field
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

logger = logging.getLogger(__name__)


class SelfCheckOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = 0
    # Multiplies every suite's case count; 1.0 runs the full case counts.
    size_factor: float = Field(default=1.0, gt=0.0, le=1.0)
    # Scales the smooth-L1 derivative handed to the gradient suite; anything but 1.0 must fail.
    smooth_l1_slope: float = 1.0

    def cases(self, n: int) -> int:
        return max(1, int(round(n * self.size_factor)))


@dataclass(kw_only=True, frozen=True)
class SuiteResult:
    name: str
    passed: bool
    max_deviation: float
    tolerance: float
    cases: int
    seconds: float = 0.0
    error: str | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def describe(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        line = (
            f"{status} {self.name:<18} max_dev={self.max_deviation:.3e} tol={self.tolerance:.1e} "
            f"cases={self.cases} ({self.seconds:.2f}s)"
        )
        if self.error:
            line += f" error: {self.error}"
        return line


@dataclass(kw_only=True, frozen=True)
class SelfCheckReport:
    """Suite results in registry order."""

    results: tuple[SuiteResult, ...]

    @property
    def passed(self) -> bool:
        return bool(self.results) and all(r.passed for r in self.results)

    @property
    def failed(self) -> list[str]:
        return [r.name for r in self.results if not r.passed]

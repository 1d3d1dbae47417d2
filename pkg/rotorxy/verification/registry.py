"""
Check Registry: registration, discovery and execution of oracle checks.

Provides a decorator-based API for defining verification checks, and a registry the
``verify-mapping`` command runs as a suite.

Usage:
    from rotorxy.verification.registry import oracle_check, CheckRegistry

    @oracle_check(
        name="quadrature_vs_dual",
        description="Direct quadrature and dual sum agree on L=2.",
        tags=["mapping"],
    )
    def quadrature_vs_dual(ctx: VerificationContext) -> CheckOutcome:
        ...

    registry = CheckRegistry()
    registry.register(quadrature_vs_dual)
    outcomes = registry.run_all(VerificationContext(size=2))
"""

from __future__ import annotations

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field

from pydantic import BaseModel, Field

from rotorxy.exact.transfer import DEFAULT_MAX_STATES

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VerificationContext:
    """Inputs shared by all checks of one suite run."""
    size: int = 2
    max_states: int = DEFAULT_MAX_STATES


class CheckOutcome(BaseModel):
    """Result of one oracle check."""
    name: str
    passed: bool
    value: float = Field(default=0.0, description="Largest observed deviation")
    tolerance: float = 0.0
    detail: str = ""
    elapsed_s: float = 0.0


CheckFn = Callable[[VerificationContext], CheckOutcome]


@dataclass
class CheckSpec:
    """Specification for an oracle check."""
    name: str
    description: str
    tags: list[str] = field(default_factory=list)
    execute: CheckFn | None = None

    def __call__(self, ctx: VerificationContext) -> CheckOutcome:
        """Run the check, turning unexpected exceptions into a failed outcome."""
        if self.execute is None:
            raise RuntimeError(f"Check '{self.name}' has no execute function.")
        start = time.perf_counter()
        try:
            outcome = self.execute(ctx)
        except Exception as exc:  # noqa: BLE001
            logger.exception("Check %s raised", self.name)
            outcome = CheckOutcome(name=self.name, passed=False, detail=f"raised: {exc}")
        return outcome.model_copy(
            update={"name": self.name, "elapsed_s": time.perf_counter() - start}
        )


def oracle_check(
    name: str,
    description: str,
    tags: list[str] | None = None,
) -> Callable[[CheckFn], CheckSpec]:
    """
    Decorator to define an oracle check.

    Args:
        name: Unique name of the check (shown in the suite report).
        description: What identity the check asserts.
        tags: Free-form labels, e.g. "mapping" or "fidelity".

    Returns:
        A decorator that wraps a function into a CheckSpec.
    """
    def decorator(fn: CheckFn) -> CheckSpec:
        return CheckSpec(name=name, description=description, tags=tags or [], execute=fn)
    return decorator


class CheckRegistry:
    """Registry of oracle checks, run in registration order."""

    def __init__(self) -> None:
        self._checks: dict[str, CheckSpec] = {}

    def register(self, check: CheckSpec) -> None:
        """
        Register an oracle check.

        Raises:
            ValueError: If a check with the same name is already registered.
        """
        if check.name in self._checks:
            raise ValueError(f"Check '{check.name}' is already registered.")
        self._checks[check.name] = check
        logger.debug("Registered check: %s", check.name)

    def get(self, name: str) -> CheckSpec | None:
        """Look up a check by name. Returns None if not found."""
        return self._checks.get(name)

    def list_checks(self) -> list[CheckSpec]:
        return list(self._checks.values())

    def describe_all(self) -> str:
        """Human-readable listing of the registered checks."""
        if not self._checks:
            return "(No checks registered)"
        lines: list[str] = []
        for check in self._checks.values():
            lines.append(f"- {check.name}: {check.description}")
            if check.tags:
                lines.append(f"  Tags: {', '.join(check.tags)}")
        return "\n".join(lines)

    def run_all(
        self, ctx: VerificationContext, only: list[str] | None = None
    ) -> list[CheckOutcome]:
        """Run every check (or the named subset) and collect the outcomes."""
        outcomes = []
        for check in self._checks.values():
            if only is not None and check.name not in only:
                continue
            outcome = check(ctx)
            level = logging.INFO if outcome.passed else logging.WARNING
            logger.log(
                level, "%s: %s (%.3g, tol %.1e, %.1fs)", check.name,
                "pass" if outcome.passed else "FAIL", outcome.value, outcome.tolerance,
                outcome.elapsed_s,
            )
            outcomes.append(outcome)
        return outcomes

    def __len__(self) -> int:
        return len(self._checks)

    def __contains__(self, name: str) -> bool:
        return name in self._checks

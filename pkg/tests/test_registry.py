"""Tests for the check registry and the built-in oracle suite."""

import pytest

from rotorxy.verification.builtins import create_builtin_checks, default_registry
from rotorxy.verification.registry import (
    CheckOutcome,
    CheckRegistry,
    CheckSpec,
    VerificationContext,
    oracle_check,
)


def _passing(ctx: VerificationContext) -> CheckOutcome:
    return CheckOutcome(name="", passed=True, value=float(ctx.size))


class TestCheckRegistry:
    def setup_method(self) -> None:
        self.registry = CheckRegistry()

    def test_register_and_get(self) -> None:
        check = CheckSpec(name="ok", description="Always passes", execute=_passing)
        self.registry.register(check)
        assert self.registry.get("ok") is check

    def test_register_duplicate(self) -> None:
        self.registry.register(CheckSpec(name="dup", description="First", execute=_passing))
        with pytest.raises(ValueError, match="already registered"):
            self.registry.register(CheckSpec(name="dup", description="Second"))

    def test_get_nonexistent(self) -> None:
        assert self.registry.get("nonexistent") is None

    def test_describe_all(self) -> None:
        self.registry.register(
            CheckSpec(name="norm", description="Density integrates to one", tags=["noise"])
        )
        desc = self.registry.describe_all()
        assert "norm" in desc
        assert "Density integrates to one" in desc
        assert "noise" in desc

    def test_describe_all_empty(self) -> None:
        assert "No checks" in self.registry.describe_all()

    def test_len_and_contains(self) -> None:
        self.registry.register(CheckSpec(name="x", description="X", execute=_passing))
        assert len(self.registry) == 1
        assert "x" in self.registry
        assert "y" not in self.registry

    def test_run_all_in_order(self) -> None:
        for name in ("b", "a"):
            self.registry.register(CheckSpec(name=name, description=name, execute=_passing))
        outcomes = self.registry.run_all(VerificationContext(size=3))
        assert [o.name for o in outcomes] == ["b", "a"]
        assert all(o.passed and o.value == 3.0 for o in outcomes)
        assert all(o.elapsed_s >= 0.0 for o in outcomes)

    def test_run_only_subset(self) -> None:
        for name in ("a", "b", "c"):
            self.registry.register(CheckSpec(name=name, description=name, execute=_passing))
        outcomes = self.registry.run_all(VerificationContext(), only=["c"])
        assert [o.name for o in outcomes] == ["c"]

    def test_exception_becomes_failure(self) -> None:
        def broken(ctx: VerificationContext) -> CheckOutcome:
            raise ArithmeticError("overflow in sum")

        self.registry.register(CheckSpec(name="broken", description="Raises", execute=broken))
        [outcome] = self.registry.run_all(VerificationContext())
        assert not outcome.passed
        assert "overflow in sum" in outcome.detail

    def test_missing_execute(self) -> None:
        with pytest.raises(RuntimeError, match="no execute function"):
            CheckSpec(name="empty", description="No body")(VerificationContext())


class TestOracleCheckDecorator:
    def test_decorator_creates_check_spec(self) -> None:
        @oracle_check(name="my_check", description="Does a thing", tags=["mapping"])
        def my_check(ctx: VerificationContext) -> CheckOutcome:
            return CheckOutcome(name="", passed=False, value=0.5, tolerance=0.1)

        assert isinstance(my_check, CheckSpec)
        assert my_check.name == "my_check"
        assert my_check.tags == ["mapping"]
        outcome = my_check(VerificationContext())
        assert outcome.name == "my_check"
        assert not outcome.passed

    def test_decorator_default_tags(self) -> None:
        @oracle_check(name="bare", description="No tags")
        def bare(ctx: VerificationContext) -> CheckOutcome:
            return CheckOutcome(name="", passed=True)

        assert bare.tags == []


class TestBuiltinChecks:
    def test_suite_names(self) -> None:
        names = [c.name for c in create_builtin_checks()]
        assert names == [
            "lattice_algebra",
            "term_stream_vs_contraction",
            "quadrature_vs_dual",
            "enumerate_vs_transfer",
            "stiffness_second_difference",
            "susceptibility_identity",
            "gaussian_fidelity_law",
            "von_mises_normalization",
        ]
        assert len(default_registry()) == 8

    def test_all_described(self) -> None:
        assert all(c.description for c in create_builtin_checks())

    @pytest.mark.parametrize("name", ["lattice_algebra", "von_mises_normalization"])
    def test_cheap_checks_pass(self, name: str) -> None:
        [outcome] = default_registry().run_all(VerificationContext(size=2), only=[name])
        assert outcome.passed, outcome.detail
        assert outcome.value <= outcome.tolerance or outcome.tolerance == 0.0


@pytest.mark.slow
class TestFullSuite:
    def test_everything_passes_on_2x2(self) -> None:
        outcomes = default_registry().run_all(VerificationContext(size=2))
        failed = [(o.name, o.detail) for o in outcomes if not o.passed]
        assert failed == []

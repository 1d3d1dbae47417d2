"""Oracle checks of the XY / dual-sum / rotor-code mapping."""

from rotorxy.verification.registry import CheckRegistry, VerificationContext, oracle_check

__all__ = ["CheckRegistry", "VerificationContext", "oracle_check"]

"""Exception hierarchy.

Every error carries a short machine-readable ``code`` and an ``exit_status``
used by the command line: 2 for precision, level and truncation problems,
1 for malformed or out-of-domain input.
"""

from __future__ import annotations


class FontaineLabError(Exception):
    code = "error"
    exit_status = 1

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.details = details


class PrecisionError(FontaineLabError):
    """Not enough p-adic or pi-adic digits to produce a trustworthy answer."""

    code = "precision-exhausted"
    exit_status = 2


class InsufficientPrecision(PrecisionError):
    code = "insufficient-precision"


class PoleOverflow(PrecisionError):
    code = "pole-overflow"


class LevelCapExceeded(PrecisionError):
    code = "level-cap-exceeded"


class SingularSystem(PrecisionError):
    code = "singular-system"


class TruncationTooSmall(PrecisionError):
    code = "truncation-too-small"


class DomainError(FontaineLabError):
    """Input outside the domain of an operation."""

    code = "domain-error"


class NotAUnit(DomainError):
    code = "not-a-unit"


class OutOfConvergence(DomainError):
    code = "out-of-convergence-domain"


class NotInPiAplus(DomainError):
    code = "input-not-in-πA⁺"


class NotPsiZero(DomainError):
    code = "input-not-psi-zero"


class NotEventuallyPeriodic(DomainError):
    code = "not-eventually-periodic"


class NotAHomomorphism(DomainError):
    code = "not-a-homomorphism-plus-constant"


class LevelTooSmall(DomainError):
    code = "level-too-small-for-δ"


class DecompositionInfeasible(PrecisionError):
    code = "decomposition-infeasible"


class MalformedParameter(DomainError):
    code = "malformed-parameter"


class PathologicalLocus(DomainError):
    code = "pathological-locus"


class MalformedInput(DomainError):
    code = "malformed-input"

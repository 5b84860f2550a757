"""Exception types shared across the package."""

from __future__ import annotations


class MorseAqcError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgumentError(MorseAqcError, ValueError):
    """An argument violates a documented precondition."""


class DomainError(MorseAqcError, ValueError):
    """A point lies outside the field window or path domain."""


class DegenerateCriticalPointError(MorseAqcError):
    """Operation requires a nondegenerate critical point."""


class PerturbationTooLargeError(MorseAqcError):
    """Perturbed critical points escaped the isolating neighborhood."""


class NoIntersectionError(MorseAqcError):
    """A slice plane misses the local indicatrix conic."""


class DivergentDelayError(MorseAqcError):
    """The gap vanishes inside the integration range (level crossing)."""


class NonCertifiableError(MorseAqcError):
    """Flow data is not certifiable (unresolved or transversality-violating
    trajectories); downstream homology must not be built from it."""


class InternalConsistencyError(MorseAqcError):
    """Two independent computations of the same invariant disagree."""


class AnalysisStageError(MorseAqcError):
    """A pipeline stage failed; carries the stage name for attribution."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage

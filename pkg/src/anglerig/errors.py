"""Exception hierarchy shared by all anglerig modules."""

from __future__ import annotations


class AngleRigError(Exception):
    """Base class for every error raised by this package."""


class CoincidentPoints(AngleRigError):
    """Two vertices occupy (numerically) the same position."""


class MismatchedStructure(AngleRigError):
    """Two angularities differ in vertex count or angle set where they must agree."""


class NumericalFailure(AngleRigError):
    """A numerical routine (SVD, eigen decomposition) did not converge."""


class SubsetSearchBudgetExceeded(AngleRigError):
    """Angle set too large for exhaustive subset enumeration.

    Carries the findings from the detectors that did run in ``partial``.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = list(partial) if partial is not None else []


class DegenerateChord(AngleRigError):
    """Chord endpoints coincide; no inscribed arc exists."""


class AlignedRays(AngleRigError):
    """Two ray loci are parallel/collinear and cannot define a unique point."""


class NoIntersection(AngleRigError):
    """Constraint loci do not meet; the requested vertex cannot be placed."""


class CaseViolation(AngleRigError):
    """A vertex-addition step does not match its declared case's anchor pattern."""


class AmbiguousBranch(AngleRigError):
    """Two candidate placements exist and the branch rule cannot pick one."""


class BuildStepError(AngleRigError):
    """A construction plan step failed; wraps the cause with its step index."""

    def __init__(self, step_index: int, cause: Exception):
        super().__init__(f"step {step_index}: {cause}")
        self.step_index = step_index
        self.cause = cause


class CoincidentAgents(AngleRigError):
    """Two agents occupy the same position; bearings are undefined."""


class CollinearConfiguration(AngleRigError):
    """A controlled angle is numerically collinear; bisector control is degenerate."""


class DegenerateSpec(AngleRigError):
    """A formation specification has no valid target geometry."""


class EventHalt(AngleRigError):
    """Simulation stopped early on a monitored event.

    The trajectory integrated so far is available as ``trajectory``.
    """

    def __init__(self, message: str, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class NumericalBlowup(AngleRigError):
    """A simulated coordinate exceeded the blowup bound."""

    def __init__(self, message: str, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class InsufficientData(AngleRigError):
    """Not enough usable samples for a fit."""


class ParseError(AngleRigError):
    """An input file is not valid JSON or misses required fields."""


class ValidationError(AngleRigError):
    """Parsed input violates a schema or model invariant."""

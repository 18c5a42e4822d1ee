"""Exception hierarchy shared by all modules."""


class EikonalError(Exception):
    """Base class for every error raised by the package."""


# geometry
class FewerThanFourPoints(EikonalError, ValueError):
    pass


class SelfIntersecting(EikonalError, ValueError):
    pass


class NonPositiveDelta(EikonalError, ValueError):
    pass


class CurvatureBoundViolated(EikonalError, ValueError):
    pass


class SelfOverlap(EikonalError, ValueError):
    pass


class OffsetTooLarge(EikonalError, ValueError):
    pass


class SpacingTooCoarse(EikonalError, ValueError):
    pass


# linefield
class NotAProjection(EikonalError, ValueError):
    pass


class UnresolvableJump(EikonalError):
    """Adjacent directions are too far apart to unwrap unambiguously."""


class NonOrientable(EikonalError):
    """Raised by :func:`~projeikonal.linefield.lift`; carries the witness loop."""

    def __init__(self, report):
        self.report = report
        super().__init__(
            f"line field is not orientable: loop of {len(report.loop)} cells "
            f"has index {report.index:+g}"
        )


# fields
class MaskTooThin(EikonalError):
    pass


class MissingNormals(EikonalError):
    pass


class SegmentLeavesDomain(EikonalError):
    pass


# variational
class DivergedLineSearch(EikonalError):
    pass


# copolymer
class InvalidCount(EikonalError, ValueError):
    pass


class CannotBalanceMass(EikonalError):
    pass


class MassImbalance(EikonalError, ValueError):
    pass


class MethodDomainMismatch(EikonalError, ValueError):
    pass


# cli / render
class EmptyField(EikonalError, ValueError):
    pass


class ConfigError(EikonalError, ValueError):
    pass


class ProblemTooLarge(EikonalError, ValueError):
    """The exact transport problem exceeds the cell cap; use a sector reduction."""

"""Exception hierarchy shared across the package."""


class DistressError(Exception):
    """Base class for all package errors."""


class DivisionByZero(DistressError, ZeroDivisionError):
    pass


class NotASquare(DistressError, ValueError):
    pass


class NotOnCurve(DistressError, ValueError):
    pass


class InvalidFieldElement(DistressError, ValueError):
    pass


class InvalidPoint(DistressError, ValueError):
    pass


class CannotCompressIdentity(DistressError, ValueError):
    pass


class EmbeddingFailed(DistressError):
    pass


class ParameterError(DistressError, ValueError):
    """Curve or layout parameters violate their invariants."""


class LayoutViolation(DistressError, ValueError):
    pass


class ContractViolation(DistressError, ValueError):
    pass


class DegenerateShare(DistressError, ValueError):
    pass


class InvalidSeed(DistressError, ValueError):
    pass


class StoreCorrupt(DistressError):
    pass


class ScriptError(DistressError, ValueError):
    pass


class EnrolmentRejected(DistressError):
    """Raised by enrolment protocols; ``reason`` is one of the REJECT_* codes."""

    def __init__(self, reason, detail=""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


class UnknownWebsite(EnrolmentRejected):
    def __init__(self, site):
        super().__init__("UnknownWebsite", site)


class ProtocolReject(DistressError):
    """A message failed verification; ``reason`` names the failed check."""

    def __init__(self, reason, detail=""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason

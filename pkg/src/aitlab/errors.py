"""Exception types shared across the package."""


class AitlabError(Exception):
    """Base class for every error raised by this package."""


class MalformedCode(AitlabError, ValueError):
    """A bit string does not start with a valid self-delimiting code."""


class LengthMismatch(AitlabError, ValueError):
    pass


class ResourceLimit(AitlabError):
    """A requested computation exceeds a configured size cap."""


class Undefined(AitlabError):
    """A derived quantity needs a complexity that is infinite in the table."""


class NoProgram(Undefined):
    """No program in the table outputs the requested string."""


class ZeroMass(AitlabError, ValueError):
    pass


class ZeroDenominator(AitlabError, ZeroDivisionError):
    pass


class BadLength(AitlabError, ValueError):
    pass


class DepthMismatch(AitlabError, ValueError):
    pass


class CacheError(AitlabError):
    """A cache file is missing, malformed, or built by another machine revision."""


class HardAssertFailure(AitlabError, AssertionError):
    """A stage-exact identity did not hold."""

"""Exception hierarchy shared by all modules."""


class AdhmError(Exception):
    """Base class for errors raised by this package."""


class DegreeError(AdhmError):
    """A path polynomial exceeded the degree cap."""


class EndpointError(AdhmError):
    """Arrows or path images whose endpoints do not compose."""


class OffShellError(AdhmError):
    """A datum violates the moment map equation beyond tolerance."""


class DegenerateInputError(AdhmError):
    """Input lies on (or numerically near) a degenerate locus."""


class SearchBudgetError(AdhmError):
    """A randomized search exhausted its budget without success."""

"""Exception hierarchy shared by the library and the command line."""


class GasketError(Exception):
    """Base class for every error raised by gasketstats."""


class InvalidSpecError(GasketError, ValueError):
    """Tangency angles out of range or out of order."""


class DegenerateSpecError(InvalidSpecError):
    """Two tangency points coincide or nearly coincide."""


class NumericalError(GasketError, ArithmeticError):
    """A geometric invariant failed beyond its floating-point tolerance."""


class DuplicatePointError(NumericalError):
    """Two points share a location, so an inverse distance is undefined."""

    def __init__(self, i, j):
        super().__init__(f"points {i} and {j} coincide (zero distance)")
        self.indices = (i, j)


class ConfigError(GasketError, ValueError):
    """Bad experiment configuration (flags or config file)."""

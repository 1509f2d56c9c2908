"""Exception hierarchy."""


class RISError(Exception):
    """Base class for all package errors."""


class ConfigError(RISError):
    """Missing, unknown or malformed configuration entry."""


class ValidationError(RISError, ValueError):
    """A parameter value violates its physical constraints."""


class DegenerateChannelError(RISError, ValueError):
    """A channel gain of zero makes a quantity infinite."""


class InfeasibleInstanceError(RISError):
    """No element count satisfies the frame and physical caps."""


class DomainError(RISError, ValueError):
    """Argument outside the domain where an objective is defined."""


class StaleOptimaError(RISError):
    """Trade-off reference optima do not belong to the instance being solved."""


class OracleCapError(RISError):
    """Exhaustive search refused because the search range exceeds the cap."""


class InfeasibleRunError(RISError):
    """Too many infeasible realizations in a Monte Carlo run."""

"""Exception types shared across the toolkit."""


class RealkitError(Exception):
    """Base class for all toolkit errors."""


class InvalidInstance(RealkitError):
    """Input data violates its schema or a structural invariant."""


class CapExceeded(RealkitError):
    """A problem size went past the cap of an exact method."""


class InvalidGroup(RealkitError):
    """A permutation list is not closed under composition and inverse."""


class InvalidPsi(RealkitError):
    """A step-function weight is not non-increasing / right-continuous."""


class InvalidBeta(RealkitError):
    """A shell-weight sequence is not non-increasing and positive."""


class Infeasible(RealkitError):
    """A construction was asked for data that fails its necessary condition."""

"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Inputs violate a documented precondition (lengths, ranges, field sizes)."""


class CapabilityError(RuntimeError):
    """Requested an exact/brute-force mode beyond its configured cap."""


class ProtocolViolation(RuntimeError):
    """The counterparty sent something the protocol forbids."""


class FramingError(ValueError):
    """Malformed wire frame (bad length, truncation, unknown type)."""


class SessionError(RuntimeError):
    """A transport-level failure (disconnect, negotiation timeout)."""


class NegotiationError(SessionError):
    """Endpoints disagree on protocol id or parameters."""


class SimulationFailure(RuntimeError):
    """Simulator exhausted its retry budget while forcing a coin flip."""

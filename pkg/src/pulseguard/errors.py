"""Exception hierarchy shared across the platform."""


class PulseguardError(Exception):
    """Base class for all platform errors."""


class DomainError(PulseguardError):
    """An argument violates a documented domain invariant."""


class SchemaError(PulseguardError):
    """Feature-vector or model schema mismatch."""


# -- signal pipeline ---------------------------------------------------------

class NoExtremaError(PulseguardError):
    """Signal has no local extrema (constant input)."""


class RejectedWaveform(PulseguardError):
    """Waveform failed corrupt-sequence validation."""

    def __init__(self, reject_code):
        self.reject_code = reject_code
        super().__init__(f"waveform rejected: {reject_code}")


# -- wire protocol -----------------------------------------------------------

class ProtocolError(PulseguardError):
    """Base class for frame codec failures."""


class BadMagic(ProtocolError):
    pass


class UnsupportedVersion(ProtocolError):
    pass


class AuthFailure(ProtocolError):
    """Authentication tag did not verify (any tampering, wrong key)."""


class ReplayRejected(ProtocolError):
    """Frame sequence not greater than the last accepted one."""


class Truncated(ProtocolError):
    """Byte string shorter than the declared or minimum frame size."""


class FrameTooLarge(ProtocolError):
    """Payload exceeds the 16-bit length field."""


class PairTimeout(ProtocolError):
    """No pairing confirmation arrived within the timeout."""


class UnknownDevice(ProtocolError):
    """Frame from a device with no established session."""


# -- device ------------------------------------------------------------------

class DeviceDead(PulseguardError):
    """Battery exhausted; the device emits nothing."""


# -- risk model --------------------------------------------------------------

class DegenerateCohort(PulseguardError):
    """Training cohort contains a single class."""


# -- alerts ------------------------------------------------------------------

class UnclassifiableCondition(PulseguardError):
    """Gestational age unknown; condition cannot be classified."""

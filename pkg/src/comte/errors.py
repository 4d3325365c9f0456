"""Exception hierarchy shared across the package."""


class ComteError(Exception):
    """Base class for all errors raised by this package."""


class SchemaMismatchError(ComteError):
    """Two samples (or a sample and a mask) disagree on shape or metric names."""


class DistractorBelowTargetError(ComteError):
    """Greedy search was given a distractor whose class probability is below the target."""


class NoDistractorError(ComteError):
    """No usable distractor of the requested class exists."""

    code = "no-distractor"


class DegenerateNeighborsError(ComteError):
    """Every neighbor sits at distance zero, so no Lipschitz ratio is defined."""


class UniverseTooLargeError(ComteError):
    """Exhaustive hitting-set search refuses universes above its documented bound."""


class DatasetFormatError(ComteError):
    """A dataset file violates the newline-delimited JSON record contract."""


class ExternalClassifierError(ComteError):
    """A subprocess classifier violated the wire protocol.

    ``payload`` carries the raw offending line (or None when the process died
    before answering) so callers can log exactly what came over the wire.
    """

    def __init__(self, code: str, message: str, payload: object = None):
        super().__init__(message)
        self.code = code
        self.payload = payload

"""Exception types raised across the package."""


class TopomonError(Exception):
    """Base class for all domain errors raised by topomon."""


class FileFormatError(TopomonError):
    """A network, profile, dataset, or graph file is malformed, truncated,
    has an unsupported format version, or violates a structural invariant
    (dimension mismatch, non-finite entry)."""


class ClassUncoveredError(TopomonError):
    """A predicted class has no fitting sample (profile fitting) or no
    stored reference diagram (scoring)."""


class FingerprintMismatchError(TopomonError):
    """A profile is being applied to a network other than the one it was
    fitted on."""

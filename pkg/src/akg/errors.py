"""Exception types shared across the package."""


class AkgError(Exception):
    """Base class for all package errors."""


class DuplicateObjectError(AkgError):
    pass


class UnknownObjectError(AkgError):
    pass


class UnknownAttributeError(AkgError):
    pass


class UnknownConceptError(AkgError):
    pass


class MembershipRangeError(AkgError):
    """A membership or threshold left the [0, 1] interval."""


class EmptyFeatureSetError(AkgError):
    """Queries require at least one feature."""


class IngestError(AkgError):
    pass


class LedgerError(AkgError):
    pass


class SnapshotError(AkgError):
    pass

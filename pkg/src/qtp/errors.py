"""Exception types raised across the package."""


class QTPError(Exception):
    pass


class DimensionMismatchError(QTPError, ValueError):
    pass


class InvalidStateError(QTPError, ValueError):
    """Input fails the Hermitian / unit-trace / PSD / normalization contract."""


class NonUnitaryError(QTPError, ValueError):
    pass


class UnsolvableResourceError(QTPError, ValueError):
    """No sender unitary achieves perfect teleportation with this resource.

    ``defect`` carries the certificate computed by the necessity check.
    """

    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect


class SupportViolationError(QTPError, ValueError):
    pass

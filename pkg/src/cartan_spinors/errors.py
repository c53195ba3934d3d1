"""Exception hierarchy."""


class CartanSpinorError(Exception):
    """Base class for all errors raised by this package."""


class SizeError(CartanSpinorError, ValueError):
    """A dimension or degree parameter is out of the supported range."""


class AlgebraMismatchError(CartanSpinorError, ValueError):
    """Operands belong to Clifford algebras on different generator counts."""


class RepresentationKindError(CartanSpinorError, ValueError):
    """The requested representation kind does not exist for this parity."""


class DimensionMismatchError(CartanSpinorError, ValueError):
    """Array or field dimensions are incompatible."""


class TangencyError(CartanSpinorError, ValueError):
    """A vector that should be tangent to the sphere is not."""


class SpherePointError(CartanSpinorError, ValueError):
    """A point is not on the unit sphere."""


class FrameError(CartanSpinorError, RuntimeError):
    """An orthonormal tangent frame could not be constructed."""


class DegreeBoundError(CartanSpinorError, RuntimeError):
    """The polynomial degree bound is too small for the requested operator."""

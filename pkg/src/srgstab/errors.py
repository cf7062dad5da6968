"""Exception types shared across the package."""


class SrgStabError(Exception):
    """Base class for all srgstab errors."""


class PoleOnAxis(SrgStabError):
    """A transfer-function denominator vanishes at the requested s = jw."""


class Singular(SrgStabError):
    """(jwI - A) is numerically singular at the requested frequency."""


class ImproperEntry(SrgStabError):
    """A rational entry has deg(num) > deg(den); no state-space form exists."""


class IllPosed(SrgStabError):
    """The feedthrough loop (I + D1 D2) of the interconnection is singular."""


class BadRange(SrgStabError):
    """Invalid frequency-grid parameters."""


class EigFailure(SrgStabError):
    """An eigensolver failed to converge."""


class NotDefined(SrgStabError):
    """Supporting angles are undefined for a non-sectorial numerical range."""


class NotSectorial(SrgStabError):
    """Phase extraction requires a sectorial matrix."""


class NumericalBreakdown(SrgStabError):
    """A rotated Hermitian part that should be positive definite is not."""


class DimensionTooLarge(SrgStabError):
    """Dense brute-force sampling is restricted to small matrices."""


class ModelFormatError(SrgStabError):
    """A model file failed validation; the message carries field context."""

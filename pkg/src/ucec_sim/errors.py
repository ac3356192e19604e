"""Exception hierarchy."""


class UcecError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(UcecError, ValueError):
    pass


class SingularMatrix(UcecError, ArithmeticError):
    """A square matrix failed the relative determinant guard."""


class RankDeficient(UcecError, ArithmeticError):
    """A least-squares system does not have full column rank."""


class SizeOverflow(UcecError, ValueError):
    """A direction lattice would exceed the configured size cap."""


class BlockSizeMismatch(UcecError, ValueError):
    pass


class NearSingularEffectiveGain(UcecError, ArithmeticError):
    pass


class ConfigInvalid(UcecError, ValueError):
    """An experiment configuration violates a scheme constraint."""

"""Exception types shared across the package."""


class SpecMismatch(ValueError):
    """Operands built over different fields, rings or ambient spaces."""


class DivisionByZero(ZeroDivisionError):
    pass


class NotAUnit(ArithmeticError):
    """Attempt to invert a non-unit of the truncated p-adic ring."""


class InvalidDimension(ValueError):
    pass


class OutsideTheoremRange(ValueError):
    """Parameters outside the range where the closed-form spectrum applies."""


class NoType(ValueError):
    """The constant monomial has no type tuple."""


class DegenerateCharacters(ValueError):
    pass


class InsufficientPrecision(ArithmeticError):
    """A value is zero modulo p^N although a finite valuation was required."""


class PrecisionExhausted(ArithmeticError):
    pass


class TooLarge(ValueError):
    def __init__(self, message, counts=None):
        super().__init__(message)
        self.counts = dict(counts or {})

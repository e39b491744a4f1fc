"""Exception hierarchy shared by every module."""


class PolyAttnError(ValueError):
    """Base class for validation errors raised by polyattn."""


class ParseError(PolyAttnError):
    """Polynomial text does not match the grammar or violates its invariants."""


class ShapeError(PolyAttnError):
    """Matrix shapes disagree."""


class AdmissibilityError(PolyAttnError):
    """The selected engine cannot handle this polynomial or input bound."""


class BudgetError(PolyAttnError):
    """Brute-force summation would exceed the configured tuple budget."""


class ExponentOverflowError(PolyAttnError):
    """A softmax exponent is too large to exponentiate in double precision."""

    def __init__(self, value, where="exponent"):
        self.value = float(value)
        super().__init__(f"{where} {self.value:.6g} overflows exp() (limit ~709)")

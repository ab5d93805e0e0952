"""Exception and warning types shared across the package."""


class BiphotonWarning(UserWarning):
    """Recoverable numerical condition (truncation, clipping, coarse grids)."""


class GridMismatchError(ValueError):
    pass


class CarrierNotFoundError(RuntimeError):
    """The off-axis carrier peak could not be located in an interferogram."""


class FitError(RuntimeError):
    pass


class SingularFitError(FitError):
    """The normal matrix is singular: parameters are not identifiable."""


class ConvergenceError(FitError):
    """Iteration limit reached; ``result`` holds the last iterate when available."""

    def __init__(self, msg, result=None):
        super().__init__(msg)
        self.result = result


class EventParseError(ValueError):
    pass

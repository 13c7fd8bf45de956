"""Exception hierarchy shared by all fracmax modules."""


class FracmaxError(Exception):
    """Base class for every error raised by fracmax."""


class DomainError(FracmaxError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class AccuracyError(FracmaxError, ArithmeticError):
    """A series or quadrature could not reach the requested accuracy."""

    def __init__(self, message: str, partial: float = float("nan"), bound: float = float("nan")):
        super().__init__(message)
        self.partial = partial
        self.bound = bound


class DivergenceError(FracmaxError, ArithmeticError):
    """An iteration or time march produced non-finite values or failed to converge."""

    def __init__(self, message: str, index: int | None = None, residual: float = float("nan")):
        super().__init__(message)
        self.index = index
        self.residual = residual


class SolverError(FracmaxError, ArithmeticError):
    """A linear system could not be solved reliably."""


class UsageError(FracmaxError, ValueError):
    """Inputs are inconsistent with each other or with an operation's contract."""


class ValidationError(UsageError):
    """A scenario file failed validation; ``problems`` lists each key-level issue."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)

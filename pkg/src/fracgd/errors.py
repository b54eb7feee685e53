"""Exception hierarchy shared by every fracgd module."""


class FracGDError(Exception):
    """Base class for all library errors."""


class ParameterError(FracGDError, ValueError):
    """An argument is outside the domain an operation is defined on."""


class TerminalLimitError(ParameterError):
    """Raised when a Caputo derivative is requested at x == c.

    The integral form is undefined there; callers that need the c -> x
    continuation should use :func:`fracgd.caputo.caputo_at_terminal_limit`.
    """


class UnsupportedSettingError(FracGDError):
    """The requested combination of parameters is not covered by the theory."""


class InfeasibleError(FracGDError):
    """A step-size or terminal condition is violated.

    ``condition`` names the violated inequality so that callers (and the CLI)
    can report it verbatim.
    """

    def __init__(self, condition: str, detail: str = ""):
        self.condition = condition
        msg = condition if not detail else f"{condition}: {detail}"
        super().__init__(msg)


class DivergenceError(FracGDError):
    """The objective grew past the divergence guard during a run."""

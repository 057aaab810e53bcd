"""Exception hierarchy shared by every module of the package."""


class KahlerError(Exception):
    """Base class for all errors raised by :mod:`kahler`."""


class DomainError(KahlerError, ValueError):
    """A jet operation was evaluated outside its domain (pole, sqrt of 0, ...)."""


class RankError(KahlerError, ValueError):
    """The differential of an immersion is not of rank two."""


class NearComplexError(KahlerError, ValueError):
    """sin(theta) is below the adapted-frame cutoff, i.e. a complex point."""


class UndefinedAngleError(KahlerError, ValueError):
    """|eta| vanishes, so the Lagrangian angle is not defined."""


class FrameError(KahlerError, ValueError):
    """A quantity that needs an adapted frame was given a generic one."""


class NonConvergenceError(KahlerError, RuntimeError):
    """An iterative procedure ran out of budget.

    The partial result, when there is one, is attached as ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class ParamError(KahlerError, ValueError):
    """Catalog or family parameters outside their documented range."""


class UnsupportedDomainError(KahlerError, ValueError):
    """The operation needs a closed (doubly periodic) surface."""


class ParseError(KahlerError, ValueError):
    """Malformed expression or surface definition.

    Attributes
    ----------
    offset : int
        1-based column of the offending character inside the parsed text
        (one past the end for premature end of input).
    expected : str
        Human-readable description of what the parser wanted.
    line : int or None
        1-based line number when parsing a surface definition file.
    """

    def __init__(self, message, offset, expected="", line=None):
        self.offset = offset
        self.expected = expected
        self.line = line
        where = f"line {line}, column {offset}" if line is not None else f"offset {offset}"
        text = f"{message} at {where}"
        if expected:
            text += f" (expected {expected})"
        super().__init__(text)
        self.message = message

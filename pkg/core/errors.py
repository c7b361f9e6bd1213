from typing import Optional


class CurvflowError(Exception):
    """Base class for input and usage errors. Expected numerical outcomes are never raised."""


class GraphFormatError(CurvflowError):
    """Malformed graph or vertex-function file."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class UnknownVertexError(CurvflowError):
    def __init__(self, vertex: str):
        self.vertex = vertex
        super().__init__(f"unknown vertex: {vertex!r}")


class DomainMismatchError(CurvflowError):
    """A vertex function whose domain is not the graph's vertex set."""


class DisconnectedGraphError(CurvflowError):
    def __init__(self, message: str = "disconnected"):
        super().__init__(message)


class NoEdgesError(CurvflowError):
    def __init__(self, message: str = "no edges"):
        super().__init__(message)


class GridError(CurvflowError):
    """Time grid that is empty, does not start at 0, or is not strictly increasing."""


class NotReversibleError(CurvflowError):
    """Raised where a reversible measure is required; carries the NotReversible report."""

    def __init__(self, report):
        self.report = report
        super().__init__(f"not reversible: {report.reason}")


class GeneratorError(CurvflowError):
    """Unknown graph family or invalid family parameters."""


class InvalidArgumentError(CurvflowError):
    pass

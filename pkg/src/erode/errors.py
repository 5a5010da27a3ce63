"""Exception hierarchy shared by the library and the command line."""


class ErodeError(Exception):
    """Base class for all errors raised by this package."""


class RecordError(ErodeError, ValueError):
    """A record violates the experiment-record invariants."""


class CsvFormatError(ErodeError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column!r}"
            where += ": "
        super().__init__(where + message)


class StoreFormatError(ErodeError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class FitError(ErodeError, ValueError):
    """Not enough data to fit the requested degree."""


class SingularSystemError(FitError):
    def __init__(self, message, condition):
        self.condition = condition
        super().__init__(f"{message} (condition estimate {condition:.3e})")


class UnsupportedDegreeError(ErodeError, ValueError):
    pass

"""Exception hierarchy shared by every stage of the pipeline."""


class TrajwarpError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateOrientation(TrajwarpError):
    """Hip-to-hip horizontal vector too short to define a heading."""


class ObjectOverflow(TrajwarpError):
    pass


class InvalidWindow(TrajwarpError, ValueError):
    pass


class SignalTooShort(TrajwarpError, ValueError):
    pass


class EmptySequence(TrajwarpError, ValueError):
    pass


class DimensionMismatch(TrajwarpError, ValueError):
    pass


class EmptyClass(TrajwarpError, ValueError):
    pass


class DegenerateData(TrajwarpError, ValueError):
    pass


class InsufficientSubjects(TrajwarpError, ValueError):
    pass


class LeakageError(TrajwarpError):
    """A test-fold sample reached a training-only code path."""


class NonSquareMatrix(TrajwarpError, ValueError):
    pass


class ParseError(TrajwarpError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")


class MissingFile(TrajwarpError, FileNotFoundError):
    pass


class LabelMapError(TrajwarpError):
    pass


class ConfigError(TrajwarpError):
    def __init__(self, message, keys=()):
        self.keys = list(keys)
        super().__init__(message)


class InvalidSpec(TrajwarpError, ValueError):
    pass


class VersionMismatch(TrajwarpError):
    pass


class CorruptBundle(TrajwarpError):
    pass

"""Exception types shared across the package."""


class AdvLabError(Exception):
    """Base class for structured library errors."""


class ShapeMismatchError(AdvLabError):
    """Two shapes that were required to agree did not; names both."""

    def __init__(self, expected, actual, context=""):
        self.expected = expected
        self.actual = actual
        self.context = context
        where = f" in {context}" if context else ""
        super().__init__(f"shape mismatch{where}: expected {expected}, got {actual}")


class DomainMismatchError(AdvLabError):
    """An image tagged with one pixel domain was used where another was required."""

    def __init__(self, expected, actual):
        self.expected = expected
        self.actual = actual
        super().__init__(f"domain mismatch: expected {expected!r}, got {actual!r}")


class ParseError(AdvLabError):
    """A binary file (model or tensor) could not be decoded."""

    def __init__(self, path, offset, message):
        self.path = str(path)
        self.offset = offset
        super().__init__(f"{path}: {message} (byte offset {offset})")


class CorpusError(AdvLabError):
    """A corpus manifest or its referenced files are inconsistent."""


class ConfigError(AdvLabError):
    """Invalid configuration; carries a JSON-pointer to the offending value."""

    def __init__(self, pointer, message):
        self.pointer = pointer
        super().__init__(f"config{pointer}: {message}")

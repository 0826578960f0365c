"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or incompatible inputs (CLI exit code 2)."""


class ParseError(ValueError):
    """Malformed input file (CLI exit code 1).

    ``offset`` is the byte position at which the problem was detected,
    when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset

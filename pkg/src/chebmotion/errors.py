"""Exception hierarchy.

Every error carries a short machine-readable ``category`` that the CLI
prints and maps to an exit code.
"""


class ChebMotionError(Exception):
    category = "error"


class DomainError(ChebMotionError, ValueError):
    """Evaluation point outside the rescaled interval [-1, 1]."""

    category = "domain"


class InvalidTaskError(ChebMotionError, ValueError):
    category = "invalid-task"


class DimensionError(ChebMotionError, ValueError):
    category = "dimension"


class UnsupportedOrderError(ChebMotionError, ValueError):
    category = "unsupported-order"


class RangeError(ChebMotionError, ValueError):
    """Position outside the range covered by a property model or samples."""

    category = "range"


class FitError(ChebMotionError, ValueError):
    category = "fit"


class UnidentifiableError(ChebMotionError, ValueError):
    category = "unidentifiable"


class OracleRefusal(ChebMotionError, ValueError):
    category = "oracle-refusal"


class ParseError(ChebMotionError, ValueError):
    """Malformed input file. ``line`` is 1-based when known."""

    category = "parse"

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class ConfigError(ChebMotionError, ValueError):
    category = "config"

"""Exception types shared across the package.

The CLI maps each class to an exit status, so raise the most specific one.
"""


class LoadGarchError(Exception):
    """Base class for package errors."""


class DataError(LoadGarchError, ValueError):
    """Input data is malformed, too short, or violates a series invariant."""


class ModelError(LoadGarchError, ValueError):
    """Model specification or parameters are invalid, or estimation failed."""


class SelectionError(ModelError):
    """Every candidate in a model-selection run failed to fit.

    ``failures`` maps a candidate label to the error message it raised.
    """

    def __init__(self, failures: dict[str, str]):
        self.failures = dict(failures)
        lines = [f"  {name}: {msg}" for name, msg in self.failures.items()]
        super().__init__("all candidates failed to fit:\n" + "\n".join(lines))

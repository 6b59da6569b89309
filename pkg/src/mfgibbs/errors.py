"""Shared exception types."""


class GibbsUndefinedError(ValueError):
    """The Gibbs measure is not normalizable for these parameters."""


class TheoremInvalidError(ValueError):
    """A theorem's applicability conditions fail for these inputs."""


class BlowUpError(RuntimeError):
    """A simulated chain left the admissible region."""

    def __init__(self, message: str, step: int, replica: int | None = None):
        super().__init__(message)
        self.step = step
        self.replica = replica

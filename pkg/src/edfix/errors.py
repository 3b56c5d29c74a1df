"""Exception types shared across the package."""


class MalformedInputError(ValueError):
    """Input arrays or files do not have the expected shape or content."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation (e.g. an empty set)."""


class GaugeValidationError(ValueError):
    """A piecewise-linear gauge leaves [0, lambda) or is structurally broken."""


class PreconditionError(ValueError):
    """A theorem's standing hypothesis on the distance function is not met."""


class ConfigurationError(ValueError):
    """An instance lacks a component required by the requested theorem."""


class GenerationError(RuntimeError):
    """The repair budget of the instance generator was exhausted."""


class MutationSkipped(Exception):
    """A mutation cannot be applied to the given instance."""

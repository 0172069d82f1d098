"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A parameter, filter, or scenario field violates its contract."""


class ScenarioError(ConfigurationError):
    """A scenario file cannot be parsed or fails validation."""


class IntegrationFailure(RuntimeError):
    """The plant integrator produced a non-finite state."""

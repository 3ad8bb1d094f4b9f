class ConfigError(ValueError):
    """Invalid model, distribution or experiment configuration."""

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class UsageError(ValueError):
    """A statistics routine was called with unusable input."""

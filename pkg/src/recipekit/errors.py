"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes (see ``recipekit.cli``).
"""


class RecipeKitError(Exception):
    """Base class for every error raised by recipekit."""


class ConfigError(RecipeKitError, ValueError):
    """Invalid configuration value or combination."""


class ConfigParseError(ConfigError):
    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class DimensionError(RecipeKitError, ValueError):
    """Tensor shapes or axes do not agree."""


class ContractError(RecipeKitError, RuntimeError):
    """A precondition of an operation was violated by the caller."""


class NumericError(RecipeKitError, FloatingPointError):
    """NaN/Inf produced or consumed, or division by zero."""

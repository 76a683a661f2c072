"""Image-classification training recipes on a small numpy autodiff core.

Subpackages: ``augment`` (pixel pipeline) and ``harness`` (synthetic data,
toy network, training loop, evaluation, seed sweeps).
"""

from .errors import ConfigError, ConfigParseError, ContractError, DimensionError, NumericError, RecipeKitError
from .recipes import MAIN_PRESETS, PRESET_NAMES, Recipe, preset, validate

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ConfigParseError", "ContractError", "DimensionError", "NumericError",
    "MAIN_PRESETS", "PRESET_NAMES", "Recipe", "RecipeKitError", "preset", "validate",
]

from .experiment_models import (
    REQUIRED_SECTIONS,
    ConfigValidationError,
    ExperimentConfig,
    validate_experiment_config,
)

__all__ = ["ConfigValidationError", "ExperimentConfig", "REQUIRED_SECTIONS", "validate_experiment_config"]

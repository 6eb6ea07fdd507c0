from .config import PointConfig
from .factory import create_intensity_model
from .measures import sigma_s, truncation_bias, validate_integrability, window_radius_for_tail
from .models import CustomModel, HomogeneousModel, IntensityModel, RadialPowerModel
from .sampler import sample_poisson
from .window import Window

__all__ = [
    "PointConfig",
    "Window",
    "IntensityModel",
    "HomogeneousModel",
    "RadialPowerModel",
    "CustomModel",
    "create_intensity_model",
    "sample_poisson",
    "sigma_s",
    "validate_integrability",
    "truncation_bias",
    "window_radius_for_tail",
]

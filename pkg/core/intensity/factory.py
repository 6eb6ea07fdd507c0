import importlib
from typing import Any, Callable, Dict, Mapping

from .models import CustomModel, HomogeneousModel, IntensityModel, RadialPowerModel


def load_callable(dotted_path: str) -> Callable:
    """
    Resolves a `"package.module.attribute"` reference to a callable.

    Args:
        dotted_path: Import path of the density function.

    Returns:
        The referenced callable.
    """
    if not isinstance(dotted_path, str) or "." not in dotted_path:
        raise ValueError(f"Density reference must be a dotted import path, got '{dotted_path}'.")
    module_path, attr_name = dotted_path.rsplit(".", 1)
    try:
        module = importlib.import_module(module_path)
        target = getattr(module, attr_name)
    except ImportError:
        raise ValueError(f"Could not import module '{module_path}' for custom density '{dotted_path}'.")
    except AttributeError:
        raise ValueError(f"Could not find '{attr_name}' in module '{module_path}'.")
    if not callable(target):
        raise ValueError(f"Custom density '{dotted_path}' is not callable.")
    return target


def create_intensity_model(spec: Mapping[str, Any]) -> IntensityModel:
    """
    Builds an IntensityModel from a plain mapping such as
    `{"variant": "radial_power", "alpha": 100, "gamma": 2, "scale": 1}`.
    """
    params: Dict[str, Any] = dict(spec)
    variant = params.pop("variant", None)
    scale = float(params.pop("scale", 1.0))

    if variant == "homogeneous":
        return HomogeneousModel(rate=float(params["rate"]), scale=scale)
    if variant == "radial_power":
        return RadialPowerModel(alpha=float(params["alpha"]), gamma=float(params["gamma"]), scale=scale)
    if variant == "custom":
        density = params["density"]
        density_fn = load_callable(density) if isinstance(density, str) else density
        search_box = params.get("search_box")
        if search_box is not None:
            search_box = (tuple(map(float, search_box[0])), tuple(map(float, search_box[1])))
        envelope = params.get("envelope")
        return CustomModel(
            density_fn=density_fn,
            sup_bound=float(params["sup_bound"]),
            scale=scale,
            search_box=search_box,
            mk_integrals={int(k): float(v) for k, v in (params.get("mk_integrals") or {}).items()},
            envelope=None if envelope is None else (float(envelope[0]), float(envelope[1])),
            radially_nonincreasing=bool(params.get("radially_nonincreasing", False)),
        )
    raise ValueError(
        f"Intensity variant '{variant}' not supported. Available variants: homogeneous, radial_power, custom"
    )

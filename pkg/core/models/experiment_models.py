from typing import Any, Callable, Dict, List, Literal, Optional, Tuple, TypeVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from core.asymptotics.regime import RegimeSpec, RhoRule
from core.components.selector import MAX_SELECTOR_K, Selector, selector_from_spec
from core.geometry.shape import ShapeS
from core.intensity.factory import create_intensity_model
from core.intensity.models import IntensityModel
from core.intensity.window import Window
from core.utils.seeding import MAX_SEED

T = TypeVar("T")

Subcommand = Literal[
    "sample", "graph-stats", "tails", "condition-check", "constants", "regime", "strong-law", "lemma-check"
]

REQUIRED_SECTIONS: Dict[str, Tuple[str, ...]] = {
    "sample": ("model", "window"),
    "graph-stats": ("model", "window", "shape"),
    "tails": ("model", "window", "shape", "selector", "tails"),
    "condition-check": ("model", "window", "shape", "selector", "condition"),
    "constants": ("model", "shape", "selector", "constants"),
    "regime": ("model", "shape", "selector", "regime"),
    "strong-law": ("model", "shape", "selector", "regime"),
    "lemma-check": (),
}


class ConfigValidationError(ValueError):
    """A config violation, reported as `config.<dotted.path>: message`."""

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


def _at(path: str, build: Callable[[], T]) -> T:
    try:
        return build()
    except ConfigValidationError:
        raise
    except (ValueError, TypeError, KeyError) as e:
        raise ConfigValidationError(path, str(e)) from e


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelSpec(_Section):
    variant: Literal["homogeneous", "radial_power", "custom"] = Field(..., description="Intensity family.")
    scale: float = Field(1.0, gt=0, description="Scale t multiplying the density.")
    rate: Optional[float] = Field(None, ge=0)
    alpha: Optional[float] = Field(None, gt=0)
    gamma: Optional[float] = Field(None, gt=0)
    density: Optional[str] = Field(None, description="Dotted import path of a custom density.")
    sup_bound: Optional[float] = Field(None, ge=0)
    search_box: Optional[Tuple[List[float], List[float]]] = None
    mk_integrals: Dict[int, float] = Field(default_factory=dict)
    envelope: Optional[Tuple[float, float]] = None
    radially_nonincreasing: bool = False

    @model_validator(mode="after")
    def check_variant_fields(self):
        """Ensures each variant carries the parameters it needs."""
        required = {
            "homogeneous": ("rate",),
            "radial_power": ("alpha", "gamma"),
            "custom": ("density", "sup_bound"),
        }[self.variant]
        for name in required:
            if getattr(self, name) is None:
                raise ValueError(f"Field '{name}' is required for a {self.variant} model.")
        return self

    def build(self) -> IntensityModel:
        return create_intensity_model(self.model_dump(exclude_none=True))


class WindowSpec(_Section):
    kind: Literal["box", "ball", "torus-box"] = "box"
    center: List[float] = Field(..., min_length=1)
    half_extent: Optional[List[float]] = None
    radius: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def check_extent(self):
        if self.kind == "ball":
            if self.radius is None:
                raise ValueError("A ball window needs 'radius'.")
        elif self.half_extent is None or len(self.half_extent) != len(self.center):
            raise ValueError("'half_extent' needs one entry per coordinate of 'center'.")
        return self

    def build(self) -> Window:
        if self.kind == "ball":
            return Window.ball(self.center, self.radius)
        if self.kind == "torus-box":
            return Window.torus(self.center, self.half_extent)
        return Window.box(self.center, self.half_extent)


class ShapeSpec(_Section):
    norm: Literal["euclidean", "sup"] = "euclidean"
    rho: float = Field(..., gt=0)
    dimension: int = Field(..., ge=1)

    def build(self) -> ShapeS:
        return ShapeS(self.norm, self.rho, self.dimension)


class SelectorSpec(_Section):
    variant: Literal["at_most_k", "exactly_k", "iso_to_h", "empty"]
    k: Optional[int] = Field(None, ge=1, le=MAX_SELECTOR_K)
    h: Optional[str] = Field(None, description="H as upper-triangle adjacency bits, row by row.")

    @field_validator("h")
    @classmethod
    def check_bits(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and set(value) - {"0", "1"}:
            raise ValueError("H bits may only contain '0' and '1'.")
        return value

    def build(self) -> Selector:
        return selector_from_spec(self.variant, self.k, self.h)


class RhoRuleSpec(_Section):
    kind: Literal["power", "thermodynamic"]
    exponent: float = 0.0
    prefactor: float = Field(1.0, gt=0)
    c: float = Field(1.0, gt=0)


class RegimeSection(_Section):
    t_grid: List[float] = Field(..., min_length=1)
    rho_rule: RhoRuleSpec
    n_replications: int = Field(200, ge=2)
    boundary: Literal["raw", "eroded", "torus"] = "eroded"
    window: Optional[WindowSpec] = Field(None, description="Torus for homogeneous models.")

    @field_validator("t_grid")
    @classmethod
    def check_grid(cls, value: List[float]) -> List[float]:
        if any(t <= 0 for t in value) or any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("t_grid must be strictly increasing and positive.")
        return value

    def build(self, dimension: int) -> RegimeSpec:
        rule = RhoRule(self.rho_rule.kind, self.rho_rule.exponent, self.rho_rule.prefactor, self.rho_rule.c)
        return RegimeSpec.build(self.t_grid, rule, dimension)


class TailsSection(_Section):
    r_grid: List[float] = Field(..., min_length=1)
    n_replications: int = Field(..., ge=1000)
    mean_f: Optional[float] = Field(None, ge=0, description="Theoretical 𝔼F; the replication mean when absent.")
    c_s_override: Optional[int] = Field(None, ge=1)
    enforce: bool = True

    @field_validator("r_grid")
    @classmethod
    def check_r(cls, value: List[float]) -> List[float]:
        if any(r < 0 for r in value):
            raise ValueError("r values must be >= 0.")
        return value


class ConditionSection(_Section):
    n_configs: int = Field(..., ge=1)
    mc_points: int = Field(..., ge=1000)
    c_s_override: Optional[int] = Field(None, ge=1)


class ConstantsSection(_Section):
    regime: Literal["sparse", "thermodynamic", "dense"]
    c: Optional[float] = Field(None, gt=0)
    n_samples: Optional[int] = Field(None, ge=2)
    inner_samples: Optional[int] = Field(None, ge=1)
    dense_method: Literal["importance", "semi_analytic"] = "importance"

    @model_validator(mode="after")
    def check_c(self):
        if self.regime == "thermodynamic" and self.c is None:
            raise ValueError("Field 'c' is required for the thermodynamic constant.")
        return self


class GraphStatsSection(_Section):
    n_replications: int = Field(1, ge=1)
    depth: int = Field(3, ge=1)


class LemmaSection(_Section):
    n_points: int = Field(1_000_000, ge=1)
    a_max: float = Field(10.0, gt=0)
    z_max: float = Field(50.0, gt=0)


class ExperimentConfig(_Section):
    master_seed: int = Field(..., ge=0, le=MAX_SEED, description="Mandatory; there is no clock-based default.")
    threads: Optional[int] = Field(None, ge=1)
    chunk_size: Optional[int] = Field(None, ge=1)
    output: Optional[str] = None
    boundary: Literal["raw", "eroded", "torus"] = "raw"
    model: Optional[ModelSpec] = None
    window: Optional[WindowSpec] = None
    shape: Optional[ShapeSpec] = None
    selector: Optional[SelectorSpec] = None
    tails: Optional[TailsSection] = None
    condition: Optional[ConditionSection] = None
    constants: Optional[ConstantsSection] = None
    regime: Optional[RegimeSection] = None
    graph_stats: Optional[GraphStatsSection] = None
    lemma: Optional[LemmaSection] = None

    def require(self, subcommand: str) -> None:
        """Checks the sections a subcommand needs and their mutual consistency before any work."""
        if subcommand not in REQUIRED_SECTIONS:
            raise ValueError(f"Unknown subcommand '{subcommand}'.")
        for section in REQUIRED_SECTIONS[subcommand]:
            if getattr(self, section) is None:
                raise ConfigValidationError(f"config.{section}", f"section required for '{subcommand}'")
        if self.window is not None and self.shape is not None and len(self.window.center) != self.shape.dimension:
            raise ConfigValidationError(
                "config.shape.dimension",
                f"shape dimension {self.shape.dimension} differs from window dimension {len(self.window.center)}",
            )
        if self.boundary == "torus" and self.window is not None and self.window.kind != "torus-box":
            raise ConfigValidationError("config.boundary", "boundary 'torus' needs a torus-box window")
        if self.model is not None and self.window is not None and self.window.kind == "torus-box":
            if self.model.variant != "homogeneous":
                raise ConfigValidationError("config.window.kind", "a torus-box window requires a homogeneous model")

    def build_model(self) -> IntensityModel:
        return _at("config.model", self.model.build)

    def build_window(self) -> Window:
        return _at("config.window", self.window.build)

    def build_shape(self) -> ShapeS:
        return _at("config.shape", self.shape.build)

    def build_selector(self) -> Selector:
        return _at("config.selector", self.selector.build)

    def build_regime(self) -> RegimeSpec:
        return _at("config.regime", lambda: self.regime.build(self.shape.dimension))

    def echo(self) -> Dict[str, Any]:
        """The JSON-ready form written into result headers."""
        return self.model_dump(mode="json", exclude_none=True)


def validate_experiment_config(raw: Dict[str, Any]) -> ExperimentConfig:
    """
    Validates a plain config mapping. The first pydantic error is re-raised as
    a ConfigValidationError whose path points into the config tree.
    """
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        path = ".".join(["config", *(str(p) for p in first["loc"])])
        raise ConfigValidationError(path, first["msg"]) from e

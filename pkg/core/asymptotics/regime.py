import logging
from dataclasses import dataclass
from typing import Literal, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

RegimeName = Literal["sparse", "thermodynamic", "dense"]
RuleKind = Literal["power", "thermodynamic"]

THERMO_DRIFT = 1e-6
_EXPONENT_TOL = 1e-12


@dataclass(frozen=True)
class RhoRule:
    """
    t ↦ ρ_t. `power`: ρ_t = prefactor·t^{−exponent}. `thermodynamic`:
    ρ_t = (c/t)^{1/d}, so that t·ρ_t^d ≡ c.
    """

    kind: RuleKind
    exponent: float = 0.0
    prefactor: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if self.kind not in ("power", "thermodynamic"):
            raise ValueError(f"Unknown rho rule '{self.kind}'.")
        if not self.prefactor > 0 or not self.c > 0:
            raise ValueError("rho rule prefactor and c must be > 0.")

    @classmethod
    def power(cls, exponent: float, prefactor: float = 1.0) -> "RhoRule":
        return cls("power", exponent=float(exponent), prefactor=float(prefactor))

    @classmethod
    def thermodynamic(cls, c: float) -> "RhoRule":
        return cls("thermodynamic", c=float(c))

    def __call__(self, t: float, d: int) -> float:
        if self.kind == "thermodynamic":
            return float((self.c / t) ** (1.0 / d))
        return float(self.prefactor * t ** (-self.exponent))

    def occupancy_exponent(self, d: int) -> float:
        """e with t·ρ_t^d ∝ t^e."""
        return 0.0 if self.kind == "thermodynamic" else 1.0 - d * self.exponent

    def classify(self, d: int) -> Tuple[RegimeName, Optional[float]]:
        e = self.occupancy_exponent(d)
        if abs(e) < _EXPONENT_TOL:
            return "thermodynamic", self.c if self.kind == "thermodynamic" else self.prefactor**d
        return ("sparse", None) if e < 0 else ("dense", None)


@dataclass(frozen=True)
class RegimeSpec:
    t_grid: Tuple[float, ...]
    rule: RhoRule
    dimension: int

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        if t.size == 0 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise ValueError("t_grid must be a non-empty, strictly increasing list of positive values.")
        if self.rule.kind == "power" and self.rule.exponent <= 0 and self.rule.classify(self.dimension)[0] != "dense":
            raise ValueError("rho_t must tend to 0 along t_grid for sparse and thermodynamic rules.")
        self._check_classification()

    @classmethod
    def build(cls, t_grid: Sequence[float], rule: RhoRule, dimension: int) -> "RegimeSpec":
        return cls(tuple(float(t) for t in t_grid), rule, int(dimension))

    @property
    def rhos(self) -> np.ndarray:
        return np.array([self.rule(t, self.dimension) for t in self.t_grid])

    @property
    def occupancies(self) -> np.ndarray:
        """t·ρ_t^d over the grid."""
        return np.asarray(self.t_grid) * self.rhos**self.dimension

    @property
    def classified_regime(self) -> RegimeName:
        return self.rule.classify(self.dimension)[0]

    @property
    def limit_c(self) -> Optional[float]:
        return self.rule.classify(self.dimension)[1]

    def _check_classification(self) -> None:
        values = self.occupancies
        regime = self.classified_regime
        if values.size < 2:
            return
        if regime == "thermodynamic":
            drift = float(np.max(np.abs(values / values[0] - 1.0)))
            if drift > THERMO_DRIFT:
                raise ValueError(f"t·rho_t^d drifts by {drift:.3g} over a thermodynamic grid.")
        elif regime == "sparse" and not np.all(np.diff(values) < 0):
            raise ValueError("t·rho_t^d is not decreasing over a sparse grid.")
        elif regime == "dense" and not np.all(np.diff(values) > 0):
            raise ValueError("t·rho_t^d is not increasing over a dense grid.")

    def _power(self, k: int, gamma: Optional[float], growth: bool) -> float:
        """q with the scaling t·(tρ^d)^q (growth=False) or the strong-law quantity (growth=True)."""
        d = self.dimension
        regime = self.classified_regime
        if regime == "dense":
            if gamma is None:
                raise ValueError("The dense regime needs the radial_power exponent gamma.")
            return d / gamma - (2.0 if growth else 1.0)
        if regime == "thermodynamic" and not growth:
            return 0.0
        return float(k - 1)

    def scale_factors(self, k: int, gamma: Optional[float] = None) -> np.ndarray:
        """t^kρ^{d(k−1)} (sparse), t (thermodynamic), t(tρ^d)^{d/γ−1} (dense)."""
        return np.asarray(self.t_grid) * self.occupancies ** self._power(k, gamma, growth=False)

    def growth_values(self, k: int, gamma: Optional[float] = None) -> np.ndarray:
        """t^kρ^{d(k−1)}/log t (sparse, thermodynamic) or t(tρ^d)^{d/γ−2}/log t (dense)."""
        t = np.asarray(self.t_grid)
        with np.errstate(divide="ignore"):
            return t * self.occupancies ** self._power(k, gamma, growth=True) / np.log(t)

    def growth_exponent(self, k: int, gamma: Optional[float] = None) -> float:
        """Exponent of t in the strong-law quantity; the condition holds iff it is > 0."""
        return 1.0 + self.rule.occupancy_exponent(self.dimension) * self._power(k, gamma, growth=True)

    def growth_condition_holds(self, k: int, gamma: Optional[float] = None) -> bool:
        holds = self.growth_exponent(k, gamma) > 0
        if not holds:
            logger.warning(
                f"Strong-law growth condition fails for the {self.classified_regime} rule "
                f"(t-exponent {self.growth_exponent(k, gamma):.3g} <= 0)."
            )
        return holds

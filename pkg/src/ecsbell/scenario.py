"""Scenario description shared by the correlators, Bell engine and oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import InvalidScenario
from .kernels import AmplifierKind, AmplifierModel


class Rotation(str, Enum):
    IDEAL = "ideal"
    EFFECTIVE = "effective"


class Ordering(str, Enum):
    AFTER = "after"     # amplifier follows the local rotation
    BEFORE = "before"   # amplifier precedes the local rotation


class Method(str, Enum):
    CLOSED = "closed"
    QUADRATURE = "quadrature"
    LINEARIZED = "linearized"   # quadrature expanded to first order in g - 1
    ORACLE = "oracle"


@dataclass(frozen=True)
class ScenarioConfig:
    """One physical pipeline: ECS amplitude, rotation, amplifier, detector."""

    alpha: float
    amplifier: AmplifierModel = field(default_factory=AmplifierModel)
    rotation: Rotation = Rotation.IDEAL
    ordering: Ordering = Ordering.AFTER
    eta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "rotation", Rotation(self.rotation))
        object.__setattr__(self, "ordering", Ordering(self.ordering))
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise InvalidScenario(f"alpha must be > 0, got {self.alpha}")
        if not (0 < self.eta <= 1):
            raise InvalidScenario(f"eta must lie in (0, 1], got {self.eta}")

    @classmethod
    def make(cls, alpha: float, gain: float = 1.0, amplifier: str = "first-order",
             rotation: str = "ideal", ordering: str = "after", eta: float = 1.0):
        return cls(alpha, AmplifierModel(AmplifierKind(amplifier), gain),
                   Rotation(rotation), Ordering(ordering), eta)

    def with_alpha(self, alpha: float) -> "ScenarioConfig":
        return replace(self, alpha=alpha)

    def with_gain(self, gain: float) -> "ScenarioConfig":
        return replace(self, amplifier=AmplifierModel(self.amplifier.kind, gain))

    @property
    def gain(self) -> float:
        return self.amplifier.gain

    @property
    def kind(self) -> AmplifierKind:
        """Amplifier kind after collapsing g = 1 onto NONE."""
        return self.amplifier.effective_kind

    @property
    def epsilon(self) -> float:
        return self.amplifier.epsilon

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "g": self.gain,
            "amplifier": self.amplifier.kind.value,
            "rotation": self.rotation.value,
            "ordering": self.ordering.value,
            "eta": self.eta,
        }

from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional, Tuple

import numpy as np


class ConstraintKind(str, Enum):
    TARGET = "Target"
    TET_STRAIN = "TetStrain"
    PUSH = "Push"
    PULL = "Pull"
    CORRESPONDENCE = "Correspondence"

    @property
    def positional(self) -> bool:
        return self is not ConstraintKind.TET_STRAIN


@dataclass(frozen=True, eq=False)
class Constraint:
    """
    One weighted projective constraint over solver vertex indices.

    Positional kinds act on one vertex; Target, Pull and Correspondence carry
    a fixed `target`, Push carries the forbidden `surface` (a SurfaceQuery)
    and its `margin`. TetStrain acts on four vertices and carries the rest
    shape inverse, the strain band `alpha` and the rest `volume`.
    """
    kind: ConstraintKind
    indices: Tuple[int, ...]
    weight: float
    target: Optional[np.ndarray] = None
    rest_inv: Optional[np.ndarray] = None
    alpha: float = 0.0
    volume: float = 1.0
    component: Optional[str] = None
    surface: Optional[Any] = None
    margin: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        expected = 4 if self.kind is ConstraintKind.TET_STRAIN else 1
        if len(self.indices) != expected:
            raise ValueError(f"{self.kind.value} constraint needs {expected} indices, got {len(self.indices)}")
        if min(self.indices) < 0:
            raise ValueError(f"negative vertex index in {self.kind.value} constraint: {self.indices}")
        if not (np.isfinite(self.weight) and self.weight >= 0):
            raise ValueError(f"constraint weight must be finite and >= 0, got {self.weight}")
        if self.target is not None:
            target = np.array(self.target, dtype=np.float64).reshape(3)
            target.setflags(write=False)
            object.__setattr__(self, "target", target)
        if self.rest_inv is not None:
            rest_inv = np.array(self.rest_inv, dtype=np.float64).reshape(3, 3)
            rest_inv.setflags(write=False)
            object.__setattr__(self, "rest_inv", rest_inv)

    @property
    def effective_weight(self) -> float:
        """Weight as it enters the quadratic form; strain weights scale with rest volume."""
        if self.kind is ConstraintKind.TET_STRAIN:
            return self.weight * self.volume
        return self.weight

    def topology_key(self) -> tuple:
        return (self.kind.value, self.indices, self.effective_weight)

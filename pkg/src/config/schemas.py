from enum import Enum
from pathlib import Path
from typing import Optional, List, Tuple
from pydantic import BaseModel, ConfigDict, Field


def cm(value: float) -> float:
    """Centimeters to meters."""
    return value / 100


def ms(value: float) -> float:
    """Milliseconds to seconds."""
    return value / 1000


Vector3 = Tuple[float, float, float]


class TetComponent(str, Enum):
    """Tet components of the anatomy template, named after their weight symbols."""
    S = "S"
    J = "J"
    C = "C"


# ==================== Simulation Parameters ====================
class Weights(BaseModel):
    """Constraint weights of the physics-based fitting."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    w_tar: float = Field(default=1e2, ge=0, allow_inf_nan=False, description="Target constraints (ridge targets)")
    w_S: float = Field(default=1e1, ge=0, allow_inf_nan=False, description="Strain constraints of tet component S")
    w_J: float = Field(default=1e4, ge=0, allow_inf_nan=False, description="Strain constraints of tet component J")
    w_C: float = Field(default=1e4, ge=0, allow_inf_nan=False, description="Strain constraints of tet component C")
    w_push: float = Field(default=1e2, ge=0, allow_inf_nan=False, description="Push-out constraints against a forbidden surface")
    w_pull: float = Field(default=1e2, ge=0, allow_inf_nan=False, description="Fixed user landmark attractions")
    w_corr: float = Field(default=1e2, ge=0, allow_inf_nan=False, description="Closest-point correspondence attractions")

    def for_component(self, component: TetComponent | str) -> float:
        return getattr(self, f"w_{TetComponent(component).value}")

    def as_tuple(self) -> tuple:
        return (self.w_tar, self.w_S, self.w_J, self.w_C, self.w_push, self.w_pull, self.w_corr)


class SolverParams(BaseModel):
    """Projective dynamics and outer-loop parameters (SI units)."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    pd_iterations: int = Field(default=10, ge=1, description="Local/global iterations per pd_solve")
    alpha: float = Field(default=0.01, ge=0, allow_inf_nan=False, description="Strain-limit half-width: singular values kept in [1/(1+alpha), 1+alpha]")
    l_min: float = Field(default=cm(2.5), ge=0, allow_inf_nan=False, description="Minimum cylinder length accepted by ridge generation (m)")
    contact_margin: float = Field(default=cm(0.5), ge=0, allow_inf_nan=False, description="Offset kept between pushed vertices and the forbidden surface (m)")
    cylinder_radius: float = Field(default=cm(0.5), gt=0, allow_inf_nan=False, description="Radius used for cylinders that do not carry their own (m)")
    timestep: float = Field(default=ms(50), gt=0, allow_inf_nan=False, description="Momentum timestep s of the PD regularizer (s)")
    delta_eps: float = Field(default=0.05, gt=0, allow_inf_nan=False, description="Relative outer-energy change that stops the fit")
    density: float = Field(default=1000.0, gt=0, allow_inf_nan=False, description="Tissue density for lumped masses (kg/m^3)")
    max_outer_iterations: int = Field(default=50, ge=1, description="Upper bound on correspondence rebuilds")
    max_correspondence_distance: Optional[float] = Field(default=None, gt=0, description="Correspondence gate (m); None means 10 x contact_margin")
    max_correspondence_angle: float = Field(default=60.0, ge=0, le=180, description="Normal-angle gate for correspondences (degrees)")

    @property
    def correspondence_distance(self) -> float:
        if self.max_correspondence_distance is not None:
            return self.max_correspondence_distance
        return 10 * self.contact_margin


class PathsConfig(BaseModel):
    """Input and output locations for the fit command."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    template_dir: Optional[Path] = Field(None, description="Directory with tet_S.node/.ele and optional tet_J, tet_C, boundary.obj")
    target: Optional[Path] = Field(None, description="Target surface OBJ")
    output_dir: Optional[Path] = Field(None, description="Directory receiving fitted meshes and report.json")
    ridge: Optional[Path] = Field(None, description="Ridge targets JSON produced by the ridge command")
    pull: Optional[Path] = Field(None, description="JSON list of {index, target} landmark pulls")
    forbidden: Optional[Path] = Field(None, description="Closed OBJ surface the template boundary must stay outside of")


class Config(BaseModel):
    """Resolved configuration of one command run."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    weights: Weights = Field(default_factory=Weights)
    params: SolverParams = Field(default_factory=SolverParams)
    paths: PathsConfig = Field(default_factory=PathsConfig)


# ==================== Mesh Reports ====================
class MeshReport(BaseModel):
    """Counts, size and defects of a parsed mesh."""
    model_config = ConfigDict(populate_by_name=True)

    vertex_count: int = Field(ge=0)
    face_or_tet_count: int = Field(ge=0, alias="element_count")
    bbox_diag: float = Field(description="Bounding box diagonal (m)")
    min_element_measure: float = Field(alias="min_measure", description="Smallest face area (m^2) or signed tet volume (m^3)")
    defects: List[str] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.defects

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)


class ExpectationReport(BaseModel):
    """Comparison of a mesh against the template-dimension table."""
    key: str
    component: str
    expected_vertices: int
    expected_elements: int
    matched: bool
    interpretation: Optional[str] = Field(None, description="'faces' or 'tets' when the element count matched")


# ==================== Ridge I/O ====================
class PlaneModel(BaseModel):
    point: Vector3
    normal: Vector3


class CylinderSpec(BaseModel):
    """Cylinder as stored on disk, meters."""
    model_config = ConfigDict(extra="forbid")

    start: Vector3
    end: Vector3
    radius: Optional[float] = Field(None, gt=0, description="Falls back to params.cylinder_radius")


class RidgeEntryModel(BaseModel):
    index: int
    target: Vector3
    kappa: float


class RidgeResultModel(BaseModel):
    cylinder: int = Field(description="Position of the cylinder in the input file")
    plane: PlaneModel
    entries: List[RidgeEntryModel] = Field(default_factory=list)


class RidgeSkipModel(BaseModel):
    cylinder: int
    reason: str


class RidgeReport(BaseModel):
    results: List[RidgeResultModel] = Field(default_factory=list)
    skipped: List[RidgeSkipModel] = Field(default_factory=list)


class PullTarget(BaseModel):
    """Landmark pull: template boundary vertex index and its fixed target."""
    model_config = ConfigDict(extra="forbid")

    index: int = Field(ge=0)
    target: Vector3


# ==================== Fit Reports ====================
class FitIterationReport(BaseModel):
    outer_iter: int
    energy: float
    n_correspondences: int
    mean_surface_dist: float


class FitReport(BaseModel):
    converged: bool
    initial_mean_surface_dist: float
    iterations: List[FitIterationReport] = Field(default_factory=list)
    factorizations: int = 0


class ConstraintModel(BaseModel):
    """Debug form of one projective constraint."""
    kind: str
    indices: List[int]
    weight: float
    payload: dict

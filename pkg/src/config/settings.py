from enum import Enum
from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings

load_dotenv(override=True)


class FactorizationBackend(str, Enum):
    AUTO = "auto"
    CHOLMOD = "cholmod"
    SPLU = "splu"


class RuntimeSettings(BaseSettings):
    log_level: str = Field(
        default="INFO",
        description="Minimum loguru level for command output",
        alias="TEMPLATE_FIT_LOG_LEVEL",
    )
    factorization: FactorizationBackend = Field(
        default=FactorizationBackend.AUTO,
        description="Sparse factorization used for the global step (auto prefers CHOLMOD when installed)",
        alias="TEMPLATE_FIT_FACTORIZATION",
    )


class GeometrySettings(BaseSettings):
    bvh_leaf_size: int = Field(
        default=4,
        ge=1,
        description="Maximum number of triangles per BVH leaf",
        alias="TEMPLATE_FIT_BVH_LEAF_SIZE",
    )
    brute_force: bool = Field(
        default=False,
        description="Answer closest-point queries by scanning every triangle instead of the BVH",
        alias="TEMPLATE_FIT_BRUTE_FORCE",
    )


class AssetSettings(BaseSettings):
    asset_dir: str | None = Field(
        default=None,
        description="Directory holding externally supplied template meshes (H.obj, tet_S.node, ...)",
        alias="TEMPLATE_FIT_ASSET_DIR",
    )


runtime_settings = RuntimeSettings()
geometry_settings = GeometrySettings()
asset_settings = AssetSettings()

"""panostep: equirectangular panorama translation and navigable world building.

Move an observer inside a spherical panorama, compute the exactly-correct
distorted view via ray-sphere geometry, chain it with a pluggable restoration
step, and export navigable worlds for an interactive viewer.
"""

from ._version import __version__
from .errors import (
    DimsMismatchError,
    DomainError,
    ExportError,
    InvalidDisplacementError,
    MalformedResponseError,
    NetworkUnreachableError,
    PanostepError,
    PartialBuildError,
    RestorerError,
    RestoreTimeoutError,
    WorldConfigError,
)
from .geometry import (
    Displacement,
    ImageDims,
    PixelCoord,
    SphereDir,
    UnitVec3,
    dir_to_pixel,
    dir_to_vec,
    displace_intersect,
    horizontal_map_closed,
    map_dir,
    pixel_to_dir,
    rotate_azimuth,
    vec_to_dir,
    vertical_map_closed,
)
from .image import EquirectImage, load_image, save_image
from .remap import (
    Interpolation,
    MethodComparison,
    RemapField,
    RemapMethod,
    build_remap_field,
    compare_methods,
    reproject_image,
    sample,
    warp_with_field,
)
from .restorer import (
    HttpRestorer,
    IdentityRestorer,
    RestoreRequest,
    RestorerConfig,
    make_restorer,
    restore,
)
from .world import (
    Move,
    WorldConfig,
    WorldGraph,
    build_world,
    expand_grid,
    export_viewer,
    validate_manifest,
)

__all__ = [name for name in dir() if not name.startswith("_")]

"""Volume-fraction insertion of implicit solids into hexahedral meshes."""
from .geometry import (
    Box,
    Capsule,
    Geometry,
    HalfSpace,
    NoAnalyticVolume,
    Sphere,
    SphereClass,
    Torus,
    Transformed,
    classify_sphere,
    closest_point,
    contains,
    exact_volume,
)
from .hexmesh import (
    DegenerateElementError,
    HexMesh,
    MeshError,
    apply_shear_scaling,
    apply_sinusoidal_perturbation,
    build_box_mesh,
    element_centroid,
    element_volume,
    jacobian_det,
    scaled_jacobian,
    trilinear_map,
)
from .insertion import (
    InsertionConfig,
    InsertionStats,
    Method,
    VolumeFractionField,
    amr_element_fraction,
    compute_speedup,
    insert_geometry,
    plane_fragment_volume,
    total_volume,
    uniform_element_fraction,
)
from .spatial import KdTree, bounding_sphere_of_elements, build_kdtree

__version__ = "0.1.0"

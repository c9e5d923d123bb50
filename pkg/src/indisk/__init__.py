"""Monte Carlo laboratory for planar Voronoi and Crofton cells conditioned on
a large inscribed disk: exact cell construction, inversion-duality oracles,
and growth-law estimation."""

from .cell import (
    CellRecord,
    UnboundedCellError,
    ZeroCellResult,
    build_zero_cell,
    escape_threshold,
    intensity_scale,
    measure_cell,
)
from .dual import (
    DualityCheck,
    GrainUnion,
    defect_measure_mc,
    grain_union_covers,
    grain_union_covers_sampled,
    vertices_equal_extremes,
)
from .geom import (
    ConvexPolygon,
    Disk,
    HalfPlane,
    circumradius,
    convex_hull,
    cut_polygon,
    halfplane_of,
    intersect_halfplanes,
    invert,
    polygon_minus_disk_area,
)
from .sampler import (
    CoupledTriple,
    RadialLaw,
    StreamKey,
    coupled_triple,
    coupling_gap_means,
    crofton_generator_stream,
    generator_stream,
    sample_iid,
    sample_poisson_polar,
    voronoi_generator_stream,
)
from .stats import (
    ExperimentDataset,
    TheoryConstants,
    fit_exponent,
    gamma_fn,
    normality_statistic,
    summarize,
    tail_estimates,
    theory_constants,
    wilson_interval,
)

__version__ = "0.1.0"

__all__ = [
    "CellRecord",
    "ConvexPolygon",
    "CoupledTriple",
    "Disk",
    "DualityCheck",
    "ExperimentDataset",
    "GrainUnion",
    "HalfPlane",
    "RadialLaw",
    "StreamKey",
    "TheoryConstants",
    "UnboundedCellError",
    "ZeroCellResult",
    "build_zero_cell",
    "circumradius",
    "convex_hull",
    "coupled_triple",
    "coupling_gap_means",
    "crofton_generator_stream",
    "cut_polygon",
    "defect_measure_mc",
    "escape_threshold",
    "fit_exponent",
    "gamma_fn",
    "generator_stream",
    "grain_union_covers",
    "grain_union_covers_sampled",
    "halfplane_of",
    "intensity_scale",
    "intersect_halfplanes",
    "invert",
    "measure_cell",
    "normality_statistic",
    "polygon_minus_disk_area",
    "sample_iid",
    "sample_poisson_polar",
    "summarize",
    "tail_estimates",
    "theory_constants",
    "vertices_equal_extremes",
    "voronoi_generator_stream",
    "wilson_interval",
]

"""Printability analysis for point-cloud models.

Slices a model into printer layers, collapses per-layer connected components
into a Mapper graph annotated with per-component hole counts from Rips
persistence, runs the same construction on the sampled empty space, and
decides watertightness from the empty-space component count.
"""

from .analysis import (AnalysisBundle, AnalysisConfig, analyze, export_bundle,
                       import_bundle, validate_bundle, watertightness)
from .components import (LayerComponent, UnionFind, brute_force_components,
                         build_grid_index, connected_components)
from .empty_space import (OccupancyGrid, build_occupancy_grid,
                          empty_space_points, fill_empty_space)
from .errors import (BudgetExceededError, BundleFormatError, CoverError,
                     DensifyError, GeometryError, MeshParseError,
                     MissingResultError, PipelineError, TopoprintError,
                     UnsupportedFormatError)
from .mapper_graph import (MapperGraph, MapperNode, attach_hole_counts,
                           build_mapper, global_components, layered_layout)
from .model_ingest import (IndexedMesh, PointCloud, densify_mesh, parse_ply,
                           parse_stl, scale_to_height, write_ply_ascii)
from .persistence import (Filtration, PersistenceInterval, ReductionResult,
                          diagram_to_json, h1_intervals, holes_at_scale,
                          reduce_boundary_matrix, rips_filtration)
from .slicing import (CoverSlice, SliceAssignment, assign_points, build_cover,
                      member_slices_for_z)

__version__ = "0.1.0"

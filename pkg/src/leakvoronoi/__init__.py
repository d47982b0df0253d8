"""Classic and refined Voronoi diagrams for leak localization from vacuum-connection flows."""
from .errors import DegenerateSites, EmptyCell, EmptyInput, FormatError, LeakVoronoiError, MissingLink
from .geometry import (
    CellPolyhedron,
    DelaunayTriangulation,
    HalfPlane,
    Point,
    SiteSet,
    VoronoiDiagram,
    bisector_halfplane,
    cell_contains,
    circumcenter,
    delaunay_triangulate,
    voronoi_diagram,
)
from .refined import RefinedDiagram, locate_ordered, merge_pair, refined_diagram
from .projection import ProjectionResult, distance_to_cell, dykstra_project
from .predictors import (
    ClassicPredictor,
    Prediction,
    RefinedPredictor,
    classic_predict,
    refined_predict,
    repeated_strategy_step,
    simultaneous_predict,
)
from .models import Dataset, Sample, SetupConfig
from .evaluation import (
    MetricsReport,
    accuracy,
    clean_outliers,
    confusion_matrix,
    evaluate_multi_leak,
    evaluate_single_leak,
    invalid_prediction_analysis,
    mean_euclidean_distance,
)
from .data_io import load_dataset, load_setup, register_adapter, save_dataset, save_report, save_setup
from .svg import export_svg
from .synthesis import FlowModel, generate_dataset, generate_leak_grid, synth_flows

__version__ = "0.1.0"

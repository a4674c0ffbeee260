"""Lower and upper bounds for the moving-target TSP with time windows."""

from .bounds import IntervalNode, SamplingParams, Variant, edge_cost, gate
from .feasible import FeasibleTour, feasible_from_lower_bound, find_feasible, reoptimize_arrivals
from .generator import GenerationFailed, GeneratorConfig, generate
from .geometry import ArcPiece, LinePiece, Point2, Trajectory, position_at
from .graph import LEVELS, ClusteredGraph, VariantUnsupported, build, partition
from .gtsp import GtspSolution, NotFound, TooManyClusters, solve_bruteforce, solve_exact, solve_heuristic
from .model import Instance, Kind, Target, TimeWindow, load, save, validate

__version__ = "0.1.0"

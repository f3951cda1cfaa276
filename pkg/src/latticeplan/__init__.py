"""Obstacle-avoiding lattice paths via the tuple encoding of ordered trees."""

from .codec import (LatticePath, OrderedTree, Side, enumerate_tuples, path_to_tuple,
                    tree_to_tuple, tuple_to_path, tuple_to_tree, validate_tuple)
from .gridmap import MapRecipe, OccupancyGrid, generate_map, load_map, save_map
from .objective import PathObjective, path_length
from .optimizers import KINDS, OptimizerConfig, optimize
from .sampler import FixedStream, RandomStream, SamplerConfig, generate_both_sides, generate_path

__version__ = "0.1.0"

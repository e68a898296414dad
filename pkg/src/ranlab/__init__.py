"""Random recursive trees, random Apollonian networks, and their long paths."""

from .apollonian import DeltaTree, RanGraph, grow_ran
from .dary_tree import TreeArena, grow_tree
from .paths import longest_path_exact, longest_path_heuristic
from .stochastics import Model, ParameterError, make_rng
from .subtree_dp import largest_buono_subtree, largest_r_ary_subtree

__all__ = [
    "DeltaTree", "Model", "ParameterError", "RanGraph", "TreeArena", "grow_ran", "grow_tree",
    "largest_buono_subtree", "largest_r_ary_subtree", "longest_path_exact",
    "longest_path_heuristic", "make_rng",
]
__version__ = "0.1.0"

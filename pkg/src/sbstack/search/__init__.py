"""Hard-decision tree-search decoders."""

from .core import (
    Bounds,
    BudgetExceeded,
    DecodeResult,
    RadiusPolicy,
    SearchNode,
    SearchRegionSpec,
    SearchStats,
    child_node,
    clamp_bounds,
    initial_radius,
    level_bounds,
    node_cost,
)
from .sphere import sphere_decode
from .stack import NodeStack, neighbor_stack_decode, sb_stack_decode, stack_decode

__all__ = [
    "Bounds",
    "BudgetExceeded",
    "DecodeResult",
    "NodeStack",
    "RadiusPolicy",
    "SearchNode",
    "SearchRegionSpec",
    "SearchStats",
    "child_node",
    "clamp_bounds",
    "initial_radius",
    "level_bounds",
    "neighbor_stack_decode",
    "node_cost",
    "sb_stack_decode",
    "sphere_decode",
    "stack_decode",
]

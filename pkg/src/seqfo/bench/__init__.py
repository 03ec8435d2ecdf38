"""Benchmark plants with known or oracle-computable optima."""

from .farm import (
    FarmControl,
    FarmLayout,
    aligned_layout,
    farm_benchmark,
    farm_plant,
    farm_problem,
    greedy_baseline,
    grid_search_optimum,
    load_layout,
    park_steady_speeds,
)
from .simple import (
    Benchmark,
    lti_benchmark,
    lti_plant,
    quadratic_problem,
    scalar_benchmark,
    scalar_optimum,
    scalar_plant,
)

__all__ = [
    "Benchmark", "FarmControl", "FarmLayout", "aligned_layout", "farm_benchmark",
    "farm_plant", "farm_problem", "greedy_baseline", "grid_search_optimum",
    "load_layout", "lti_benchmark", "lti_plant", "park_steady_speeds",
    "quadratic_problem", "scalar_benchmark", "scalar_optimum", "scalar_plant",
]

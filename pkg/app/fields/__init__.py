from .grid import Grid2D
from .kernel import Kernel, convolve, direct_convolve
from .operators import divergence, gradient, grid_operators, variable_coefficient_laplacian

__all__ = [
    "Grid2D",
    "Kernel",
    "convolve",
    "direct_convolve",
    "divergence",
    "gradient",
    "grid_operators",
    "variable_coefficient_laplacian",
]

from .patterns import control_series, initial_phase, vortex_field
from .template_utils import find_plot_template, render_template

__all__ = [
    "initial_phase",
    "control_series",
    "vortex_field",
    "find_plot_template",
    "render_template",
]

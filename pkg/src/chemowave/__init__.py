"""chemowave: numerical laboratory for a chemotaxis system with logistic growth.

The package computes critical wave speeds, constructs traveling-wave
profiles by an iterated sub/super-solution scheme, and measures spreading
speeds of compactly supported data against their theoretical interval.
"""

__version__ = "0.1.0"

from .backend import KERNEL_BACKEND
from .constants import ModelParams, SpeedInterval, c_mu, c_star, mu_of_c, \
    mu_star, mu_star_N, speed_interval
from .grid import Field, Grid1D, make_grid, sample

__all__ = [
    "KERNEL_BACKEND", "ModelParams", "SpeedInterval", "c_mu", "c_star",
    "mu_of_c", "mu_star", "mu_star_N", "speed_interval",
    "Field", "Grid1D", "make_grid", "sample", "__version__",
]

"""Figure scripts for the backflow toolkit's CSV outputs.

Read-only consumers of the published CSV contracts (trajectory,
distance, sweep); nothing in this package imports the simulation code.
"""

__version__ = "0.1.0"

from .csvread import InputError, read_distance, read_sweep, read_trajectory
from .figures import FigureSpec, save_figure

__all__ = [
    "__version__",
    "InputError",
    "read_trajectory",
    "read_distance",
    "read_sweep",
    "FigureSpec",
    "save_figure",
]

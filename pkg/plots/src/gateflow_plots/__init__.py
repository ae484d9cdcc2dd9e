"""Figure generation for gateflow CSV outputs.

Reads the delimited files written by the simulation CLI (densities.csv,
frames/frame_*.csv, sweep.csv) and renders matplotlib figures to image
files.  The readers are pure: they never import the simulation package,
so figures can be produced on any machine that has the CSVs.
"""

from .io import PlotDataError, load_densities, load_frame, load_sweep
from .figures import STATUS_COLORS, plot_densities, plot_frame, plot_sweep

__version__ = "0.1.0"

__all__ = [
    "PlotDataError",
    "load_densities",
    "load_frame",
    "load_sweep",
    "STATUS_COLORS",
    "plot_densities",
    "plot_frame",
    "plot_sweep",
    "__version__",
]

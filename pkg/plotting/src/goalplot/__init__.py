"""Learning-curve and trajectory figures for goalbench CSV logs."""

from .csvio import Episode, PlotInputError, Summary, read_episode, read_summary
from .curves import CurveSpec, build_curves, plot_learning_curves
from .smoothing import rolling_median
from .traj import plot_trajectory

__version__ = "0.1.0"

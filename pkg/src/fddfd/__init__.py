"""Derivative-free descent through Gaussian smoothing.

The main entry points are :func:`run_fd_dfd` (finite-difference descent
with raw or stabilized directions) and :func:`run_rad` (softmin-weighted
batch averaging), both driven by a geometric smoothing schedule.
"""

from .analysis import *  # noqa: F401,F403
from .estimators import *  # noqa: F401,F403
from .io import *  # noqa: F401,F403
from .objectives import *  # noqa: F401,F403
from .optimizers import *  # noqa: F401,F403
from .sampling import *  # noqa: F401,F403
from . import analysis, estimators, io, objectives, optimizers, sampling
from .cli import ExperimentConfig, run_experiment, sphere_init

__all__ = (analysis.__all__ + estimators.__all__ + io.__all__ + objectives.__all__ + optimizers.__all__
           + sampling.__all__ + ["ExperimentConfig", "run_experiment", "sphere_init"])
__version__ = "0.1.0"

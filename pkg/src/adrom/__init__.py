"""Online adaptive model reduction with lookahead data gathering.

The package couples an implicit-Euler full-order solver for a 1D
rotating-detonation-wave model with an online-adaptive hyper-reduced model:
POD + interpolation-point selection for the initial reduced space, rank-1
basis updates driven by a sliding window of data samples, and predictor
models that look ahead in time to gather those samples.
"""

from .adapt import (DataWindow, Rank1Update, adapt_basis, lookback_sample,
                    rank1_update, update_sampling_points)
from .driver import (RunConfig, avg_rel_error, bench, bifurcation_sweep,
                     probe, run_adeim, run_fom)
from .fom import NewtonError, Trajectory, fom_trajectory, implicit_euler_step
from .lookahead import (PredictorBlowupError, PredictorConfig,
                        lookahead_sample, lookahead_sample_projected,
                        predictor_step_full, predictor_step_reduced)
from .model import (Grid1D, RdeModel, RdeParams, TimeGrid, initial_condition)
from .rom import eim_reconstruct, pod, qdeim_points, rom_step

__version__ = "0.1.0"

__all__ = [
    "DataWindow", "Rank1Update", "adapt_basis", "lookback_sample",
    "rank1_update", "update_sampling_points",
    "RunConfig", "avg_rel_error", "bench", "bifurcation_sweep", "probe",
    "run_adeim", "run_fom",
    "NewtonError", "Trajectory", "fom_trajectory", "implicit_euler_step",
    "PredictorBlowupError", "PredictorConfig", "lookahead_sample",
    "lookahead_sample_projected", "predictor_step_full",
    "predictor_step_reduced",
    "Grid1D", "RdeModel", "RdeParams", "TimeGrid", "initial_condition",
    "eim_reconstruct", "pod", "qdeim_points", "rom_step",
    "__version__",
]

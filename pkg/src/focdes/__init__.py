"""focdes: fractional-order load-frequency controller design toolkit."""

__version__ = "0.1.0"

from .fractional import (FopidParams, OustaloupSpec, RealizedController,
                         decompose_order, oustaloup, realize_controller,
                         step_controller)
from .lti_sim import (DeadBand, LtiSystem, RateLimiter, SimulationDiverged,
                      SolverConfig, apply_dead_band, from_transfer_function,
                      frequency_response, series, step_lti, step_rate_limited_lag)
from .nsga2 import (Bounds, Individual, MooConfig, RandomStream, crowding_distance,
                    dominates, henon_next, logistic_next, non_dominated_sort,
                    run_nsga2, stream_next)
from .pareto import (MetricReport, ParetoFront, RunProvenance, best_compromise,
                     diversity_metric, fuzzy_membership, hypervolume_to_origin,
                     metric_report, pareto_spread, select_best_front, spacing_metric)
from .plant import (AreaParams, LoadProfile, ObjectiveVector, PlantConfig, SimTrace,
                    compute_ace, evaluate_objectives, frequency_bias, linear_config,
                    nominal_config, simulate)

__all__ = [name for name in dir() if not name.startswith("_")]

"""Temporal networks whose vertices switch between online and hidden.

Submodules
----------
graph
    Initial topologies (scale-free, small-world, NVE, edge lists).
process
    Event-driven simulation of the online/hidden dynamics.
theory
    Stationary distribution, moments and rate matrix of the size chain.
stats
    Histograms, KL divergence, skewness and topology metrics.
experiments
    Replicated runs and the model-fitting pipeline behind the CLI.
"""

__version__ = "0.1.0"

from .errors import (CapacityError, EdgeListParseError, OrderingError, ParameterError,
                     UndefinedStatisticError)
from .graph import (Graph, GeneratorSpec, generate_nve, generate_scale_free,
                    generate_small_world, load_edge_list, save_edge_list)
from .process import NohParams, NohProcess, OnlineSnapshot, SizeSeries, run_series
from .stats import Histogram, kl_divergence, skewness
from .theory import (TheoryParams, expected_size, isolation_probability, log_stationary_pmf,
                     rate_matrix, solve_stationary, stationary_pmf, variance_size)

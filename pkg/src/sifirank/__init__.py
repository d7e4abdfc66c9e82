"""Rank systemically important institutions in interbank exposure networks.

The impact index blends each institution's direct expected loss on its
creditors with losses propagated along the exposure network, weighted by
closeness and betweenness centrality.
"""
from .balance import BalanceParams, BalanceSheet, BalanceSheets, derive_balance_sheets
from .errors import (ConfigError, DataError, EstimationError, NumericalError, SifiRankError,
                     UnreachableSinkError)
from .impact import ImpactVector, build_iteration_matrices, iterate_impact, rank_institutions
from .model import ImpactModel, compare_methods
from .network import DirectedFinancialNetwork, centrality, degrees, generate_ba, generate_complete
from .oracle import dominant_eigenvector, project_to_simplex, solve_optimal
from .shockmc import ShockConfig, apply_shocks, monte_carlo_impact
from .sinkrank import inv_sinkrank, rank_correlation, sinkrank, to_transition
from .stats import classify, dkw_band, ecdf, perturbation_experiment, quantile

__version__ = "0.1.0"

"""Hierarchical compressive data aggregation for sensor networks.

Simulates adaptive, locally sparsity-gated compressive aggregation
(``ahdacs``) and its global-sparsity baseline (``hdacs``) over a spatial
cluster hierarchy, with energy accounting and recovery metrics.
"""

from ._validation import InvalidParameterError, OutOfRangeError
from .cs import cs_gate, measure, measurement_count, recover, sensing_matrix
from .energy import EnergyLedger, RadioModel, rx_energy, tx_energy
from .estimator import HierarchicalCSAggregator
from .field import ScalarField, gen_gaussian_bumps, gen_piecewise, sample
from .metrics import condition_census, disabled_stats, mse_per_level, root_mse
from .protocols import (
    AggregationTrace,
    Status,
    global_sparsity,
    level_threshold,
    run_ahdacs,
    run_hdacs,
)
from .topology import ClusterTree, NodeSet, build_hierarchy, place_nodes, subtree_readings
from .transform import dct_forward, dct_inverse, estimate_sparsity, truncate

__version__ = "0.1.0"

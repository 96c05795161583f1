"""scikit-learn style wrapper around the aggregation protocols."""

from __future__ import annotations

from dataclasses import replace

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import InvalidParameterError, check_positions
from .energy import RadioModel
from .metrics import root_mse
from .protocols import run_protocol
from .topology import build_hierarchy, node_set_from_positions


class HierarchicalCSAggregator(TransformerMixin, BaseEstimator):
    """Aggregate sensor snapshots through a compressive cluster hierarchy.

    ``fit`` takes node positions and builds the cluster tree. ``transform``
    takes readings, one row per snapshot with one column per node, runs the
    protocol on each row and returns what the sink reconstructs.

    Parameters
    ----------
    protocol : {"ahdacs", "hdacs"}
        Adaptive (local sparsity) or global-sparsity gating.
    branching, levels : int
        Clusters per parent and hierarchy depth.
    fraction : float
        DCT truncation fraction in (0, 1).
    K_T : int or None
        Global sparsity for ``"hdacs"``; estimated per snapshot when None.
    extent : float or None
        Side of the square region; defaults to the largest coordinate.
    power_control : {"fixed", "adaptive"}
        Radio model used for the energy ledger.
    seed : int
        Seed for sensing matrices.

    Attributes
    ----------
    tree_ : ClusterTree
    nodes_ : NodeSet
    traces_ : list of AggregationTrace
        One per row of the last ``transform`` call.
    """

    def __init__(self, protocol="ahdacs", branching=4, levels=4, fraction=0.01, K_T=None,
                 extent=None, power_control="fixed", seed=0):
        self.protocol = protocol
        self.branching = branching
        self.levels = levels
        self.fraction = fraction
        self.K_T = K_T
        self.extent = extent
        self.power_control = power_control
        self.seed = seed

    def fit(self, X, y=None):
        X = check_positions(X)
        if self.protocol not in ("ahdacs", "hdacs"):
            raise InvalidParameterError(f"unknown protocol {self.protocol!r}")
        self.nodes_ = node_set_from_positions(X, self.extent)
        self.tree_ = build_hierarchy(self.nodes_, self.branching, self.levels)
        self.n_features_in_ = len(X)
        return self

    def _check_readings(self, X):
        check_is_fitted(self, "tree_")
        R = np.asarray(X, dtype=float)
        if R.ndim == 1:
            R = R.reshape(1, -1)
        if R.ndim != 2 or R.shape[1] != self.n_features_in_:
            raise InvalidParameterError(
                f"expected readings of shape (n_snapshots, {self.n_features_in_}), got {R.shape}"
            )
        return R

    def transform(self, X):
        R = self._check_readings(X)
        radio = RadioModel(self.power_control)
        self.traces_ = []
        out = np.empty_like(R)
        for k, row in enumerate(R):
            nodes = replace(self.nodes_, readings=row)
            tr = run_protocol(self.tree_, nodes, self.protocol, self.fraction, self.seed,
                              K_T=self.K_T, radio=radio, round_=k)
            self.traces_.append(tr)
            out[k] = tr.root_estimate
        return out

    def score(self, X, y=None):
        """Negative mean root MSE over snapshots (higher is better)."""
        R = self._check_readings(X)
        self.transform(R)
        errs = [root_mse(tr, row) for tr, row in zip(self.traces_, R)]
        return -float(np.mean(errs))

    @property
    def energy_(self):
        """Total joules spent by the last ``transform`` call."""
        check_is_fitted(self, "traces_")
        return float(sum(tr.ledger.total for tr in self.traces_))


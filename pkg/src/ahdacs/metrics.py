"""Evaluation quantities over aggregation traces.

Per-level recovery MSE, disabled-cluster ratios (rho, sigma, zeta) and the
five-way comparison of adaptive vs. global gating decisions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import InvalidParameterError, OutOfRangeError
from .protocols import Status, prop1_cutoff

__all__ = [
    "DisabledStats",
    "disabled_stats",
    "mse_per_level",
    "root_mse",
    "classify_condition",
    "condition_census",
    "CONDITIONS",
]

CONDITIONS = (1, 2, 3, 4, 5)


@dataclass
class DisabledStats:
    """Disabled-cluster ratios for levels ``1..up_to_level``.

    ``rho[j]`` is the disabled fraction among gate-eligible clusters at
    level ``j``; ``sigma_l[j]`` maps each disabled cluster index to the
    disabled fraction of its eligible children; ``sigma[j]`` averages
    those. ``zeta`` is the direct count over all levels, ``zeta_product``
    the value rebuilt from ``rho[i]`` and the sigma chain.
    """

    up_to_level: int
    eligible: dict = field(default_factory=dict)
    disabled: dict = field(default_factory=dict)
    rho: dict = field(default_factory=dict)
    sigma_l: dict = field(default_factory=dict)
    sigma: dict = field(default_factory=dict)
    zeta: float = 0.0
    zeta_product: float = 0.0

    @property
    def discrepancy(self):
        return abs(self.zeta - self.zeta_product)


def disabled_stats(trace, up_to_level):
    """Compute rho, sigma and zeta for levels ``1..up_to_level`` of ``trace``."""
    if not 1 <= up_to_level < trace.T:
        raise OutOfRangeError(f"up_to_level must be in [1, {trace.T - 1}], got {up_to_level}")
    tree = trace.tree
    st = DisabledStats(up_to_level)
    for j in range(1, up_to_level + 1):
        row = trace.level(j)
        elig = [d for d in row if d.eligible]
        dis = [d.index for d in elig if d.status is Status.DISABLED]
        st.eligible[j] = len(elig)
        st.disabled[j] = dis
        st.rho[j] = len(dis) / len(elig) if elig else 0.0
        if j >= 2:
            child_row = trace.level(j - 1)
            per = {}
            for idx in dis:
                kids = [child_row[c] for c in tree.cluster(j, idx).children]
                kids = [k for k in kids if k.eligible]
                if kids:
                    per[idx] = sum(k.status is Status.DISABLED for k in kids) / len(kids)
            st.sigma_l[j] = per
            st.sigma[j] = float(np.mean(list(per.values()))) if per else 0.0

    total = sum(st.eligible.values())
    if total:
        st.zeta = sum(len(st.disabled[j]) for j in st.disabled) / total
        i = up_to_level
        acc = 0.0
        for j in range(1, i + 1):
            chain = st.rho[i]
            for k in range(j + 1, i + 1):
                chain *= st.sigma[k]
            acc += st.eligible[j] * chain
        st.zeta_product = acc / total
    return st


def mse_per_level(trace, nodes):
    """Mean over clusters of the MSE between each head's vector and the truth.

    Returns an array indexed ``[level - 1]``; the last entry is the root MSE.
    """
    truth = np.asarray(nodes.readings, dtype=float)
    out = np.zeros(trace.T)
    for lvl in range(1, trace.T + 1):
        errs = []
        for d in trace.level(lvl):
            members = list(trace.tree.cluster(lvl, d.index).members)
            errs.append(float(np.mean((d.assembled - truth[members]) ** 2)))
        out[lvl - 1] = float(np.mean(errs)) if errs else 0.0
    return out


def root_mse(trace, nodes):
    """MSE of the sink's estimate; ``nodes`` is a NodeSet or a readings array."""
    truth = np.asarray(getattr(nodes, "readings", nodes), dtype=float)
    return float(np.mean((trace.root_estimate - truth) ** 2))


def classify_condition(adaptive, baseline):
    """Condition 1-5 for one cluster given both protocols' decisions.

    1: both enabled, local K above K_T.  2: only the baseline enabled.
    3: only the adaptive protocol enabled.  4: both enabled, local K at or
    below K_T.  5: neither enabled.
    """
    a, h = adaptive.enabled, baseline.enabled
    if a and h:
        return 1 if adaptive.K > baseline.K else 4
    if h:
        return 2
    if a:
        return 3
    return 5


def _same_shape(t1, t2):
    if t1.T != t2.T:
        return False
    return all(
        [d.N for d in t1.level(i)] == [d.N for d in t2.level(i)] for i in range(1, t1.T + 1)
    )


def condition_census(trace_ahdacs, trace_hdacs, K_T=None, scope="above-cutoff"):
    """Count clusters in each of the five gating conditions.

    ``scope="above-cutoff"`` classifies transmitting levels strictly above
    the highest level where ``K_T`` exceeds the level threshold;
    ``scope="all"`` classifies every transmitting level.
    """
    if not _same_shape(trace_ahdacs, trace_hdacs):
        raise InvalidParameterError("traces were not produced over the same tree")
    if scope not in ("above-cutoff", "all"):
        raise InvalidParameterError(f"unknown scope {scope!r}")
    report = trace_hdacs.sparsity
    if K_T is not None and K_T != report.K_T:
        raise InvalidParameterError(f"K_T={K_T} does not match the baseline trace ({report.K_T})")
    T = trace_ahdacs.T
    start = 1 if scope == "all" else prop1_cutoff(report, T) + 1
    counts = dict.fromkeys(CONDITIONS, 0)
    for lvl in range(start, T):
        for a, h in zip(trace_ahdacs.level(lvl), trace_hdacs.level(lvl)):
            counts[classify_condition(a, h)] += 1
    return counts

"""Hierarchical compressive aggregation: the adaptive protocol and its global baseline.

Both protocols walk the cluster tree bottom-up. Level-1 members send their
single reading to the head. Every head then assembles its subtree vector
(recovering any compressed child packets first), estimates sparsity,
applies the CS gate and forwards either measurements or the raw vector.
The adaptive protocol (``"ahdacs"``) gates on each cluster's own sparsity;
the baseline (``"hdacs"``) uses one global sparsity for every cluster.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import cs
from ._validation import InvalidParameterError, check_fraction, check_int
from .energy import EnergyLedger, RadioModel
from .transform import dct_forward, estimate_sparsity, truncate, truncate_top_k

__all__ = [
    "HEADER_BITS",
    "WORD_BITS",
    "Status",
    "ClusterDecision",
    "Transmission",
    "SparsityReport",
    "AggregationTrace",
    "global_sparsity",
    "level_threshold",
    "prop1_cutoff",
    "run_ahdacs",
    "run_hdacs",
    "run_protocol",
]

HEADER_BITS = 64  # K, N, level, cluster index, status flag
WORD_BITS = 32


class Status(str, enum.Enum):
    ENABLED = "cs-enabled"
    DISABLED = "cs-disabled"
    ROOT = "root"  # level-T head: assembles the estimate, sends nothing


@dataclass
class ClusterDecision:
    level: int
    index: int
    N: int
    K: int  # sparsity used for the gate and measurement count
    local_K: int  # sparsity of the head's assembled vector
    status: Status
    M: int | None
    payload_words: int
    bits_sent: int
    assembled: np.ndarray  # vector at this head
    delivered: np.ndarray | None  # vector as reconstructed by the parent head
    events: list = field(default_factory=list)

    @property
    def enabled(self):
        return self.status is Status.ENABLED

    @property
    def eligible(self):
        return self.N >= 4


@dataclass(frozen=True)
class Transmission:
    sender: int
    receiver: int
    bits: int
    distance: float
    level: int  # 0 for member->head readings, else the sending cluster's level
    amp_distance: float = 0.0  # distance the energy was charged at


@dataclass
class SparsityReport:
    K_T: int
    local_K: dict  # (level, index) -> K
    level_thresholds: dict  # level -> K_{i_T}
    fraction: float


@dataclass
class AggregationTrace:
    protocol: str
    decisions: list  # decisions[i - 1] holds level i, ordered by cluster index
    root_estimate: np.ndarray
    sparsity: SparsityReport
    ledger: EnergyLedger
    transmissions: list
    seed: int
    tree: object = None
    radio: RadioModel = field(default_factory=RadioModel)

    @property
    def T(self):
        return len(self.decisions)

    def level(self, i):
        return self.decisions[i - 1]

    def iter_decisions(self):
        for lvl in self.decisions:
            yield from lvl

    def counts(self):
        """(enabled, disabled) over all transmitting clusters."""
        enabled = sum(d.status is Status.ENABLED for d in self.iter_decisions())
        disabled = sum(d.status is Status.DISABLED for d in self.iter_decisions())
        return enabled, disabled

    @property
    def events(self):
        return [(d.level, d.index, e) for d in self.iter_decisions() for e in d.events]


def _readings(nodes):
    if nodes.readings is None:
        raise InvalidParameterError("nodes carry no readings; call NodeSet.with_readings first")
    return np.asarray(nodes.readings, dtype=float)


def global_sparsity(tree, nodes, fraction=0.01):
    """Sparsity of the whole field in canonical order (an a-priori oracle)."""
    x = _readings(nodes)[list(tree.root.members)]
    return estimate_sparsity(x, fraction)


def level_threshold(tree, level):
    """Largest ``N/log2 N`` over gate-eligible clusters at ``level``.

    Returns 0.0 when the level has no cluster of size 4 or more.
    """
    sizes = [c.size for c in tree.clusters(level) if c.size >= 4]
    return max((s / math.log2(s) for s in sizes), default=0.0)


def prop1_cutoff(report, T):
    """Highest transmitting level ``i`` with ``K_T > K_{i_T}``; 0 if none."""
    cut = 0
    for i in range(1, T):
        if report.K_T > report.level_thresholds[i]:
            cut = i
    return cut


def run_protocol(tree, nodes, protocol, fraction=0.01, seed=0, K_T=None, radio=None, round_=0):
    """Run ``"ahdacs"`` or ``"hdacs"`` over ``tree`` and return the trace.

    ``K_T`` defaults to the omniscient global sparsity; ``round_`` only
    feeds the sensing-matrix seeds.
    """
    if protocol not in ("ahdacs", "hdacs"):
        raise InvalidParameterError(f"unknown protocol {protocol!r}")
    fraction = check_fraction(fraction)
    seed = check_int(seed, "seed")
    x_true = _readings(nodes)
    if len(x_true) != tree.node_count:
        raise InvalidParameterError("tree and node set disagree on node count")
    P = nodes.positions
    if K_T is None:
        K_T = global_sparsity(tree, nodes, fraction)
    K_T = check_int(K_T, "K_T", minimum=0)
    if protocol == "hdacs" and K_T < 1:
        raise InvalidParameterError("HDACS needs a global sparsity K_T >= 1")

    radio = radio if radio is not None else RadioModel()
    T = tree.T
    ledger = EnergyLedger(tree.node_count, levels=T, e_elec=radio.e_elec, eps_amp=radio.eps_amp)
    transmissions = []

    def send(sender, receiver, bits, level):
        if sender == receiver:
            return 0
        d = float(np.hypot(*(P[sender] - P[receiver])))
        amp = float(radio.amp_distance(d))
        ledger.charge(sender, receiver, bits, amp, level)
        transmissions.append(Transmission(sender, receiver, bits, d, level, amp))
        return bits

    # member -> level-1 head, one reading each
    for cl in tree.clusters(1):
        for m in cl.members:
            send(m, cl.head, HEADER_BITS + WORD_BITS, 0)

    local_K = {}
    decisions = []
    delivered_prev = None
    for lvl in range(1, T + 1):
        row = []
        delivered_now = []
        for cl in tree.clusters(lvl):
            if lvl == 1:
                vec = x_true[list(cl.members)]
            else:
                vec = np.concatenate([delivered_prev[c] for c in cl.children])
            N = vec.size
            k_local = estimate_sparsity(vec, fraction)
            local_K[(lvl, cl.index)] = k_local
            K = k_local if protocol == "ahdacs" else K_T
            events = []

            if lvl == T:
                row.append(ClusterDecision(lvl, cl.index, N, K, k_local, Status.ROOT,
                                           None, 0, 0, vec, None, events))
                delivered_now.append(vec)
                continue

            parent_head = tree.cluster(lvl + 1, cl.parent).head
            if cs.cs_gate(K, N):
                coeffs = dct_forward(vec)
                if protocol == "ahdacs":
                    kept = truncate(coeffs, fraction)
                else:
                    kept = truncate_top_k(coeffs, K)
                if K == 0:
                    M, out = 0, np.zeros(N)
                else:
                    plan = cs.MeasurementPlan.for_signal(K, N, cs.derive_seed(seed, lvl, cl.index, round_))
                    M = plan.M
                    if M >= N:
                        events.append("no-gain")
                    Phi = cs.sensing_matrix(plan.M, N, plan.seed)
                    packet = cs.MeasurementPacket(plan, cs.measure(Phi, kept.signal()), (lvl, cl.index))
                    out, info = cs.recover(packet.measurements, plan, full_output=True)
                    if info.ridge_used:
                        events.append("ridge")
                    if not np.all(np.isfinite(out)):
                        events.append("unrecoverable")
                        out = np.zeros(N)
                status, words = Status.ENABLED, M
            else:
                status, M, words, out = Status.DISABLED, None, N, vec.copy()
            bits = send(cl.head, parent_head, HEADER_BITS + WORD_BITS * words, lvl)
            row.append(ClusterDecision(lvl, cl.index, N, K, k_local, status, M, words,
                                       bits, vec, out, events))
            delivered_now.append(out)
        decisions.append(row)
        delivered_prev = delivered_now

    root = decisions[-1][0].assembled
    estimate = np.empty(tree.node_count)
    estimate[list(tree.root.members)] = root  # back to node-id order

    report = SparsityReport(
        K_T=K_T,
        local_K=local_K,
        level_thresholds={i: level_threshold(tree, i) for i in range(1, T + 1)},
        fraction=fraction,
    )
    return AggregationTrace(protocol, decisions, estimate, report, ledger, transmissions,
                            seed, tree, radio)


def run_ahdacs(tree, nodes, fraction=0.01, seed=0, K_T=None, radio=None, round_=0):
    """Adaptive protocol: each head gates on its own DCT sparsity."""
    return run_protocol(tree, nodes, "ahdacs", fraction, seed, K_T, radio, round_)


def run_hdacs(tree, nodes, K_T=None, fraction=0.01, seed=0, radio=None, round_=0):
    """Baseline: every head gates and measures with the global sparsity ``K_T``."""
    return run_protocol(tree, nodes, "hdacs", fraction, seed, K_T, radio, round_)

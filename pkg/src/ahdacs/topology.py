"""Node placement and the multi-resolution cluster hierarchy.

The square region is split recursively into an ``n``-way spatial grid:
``n = k*k`` gives a ``k x k`` split per level, any other ``n`` a strip
split along x. Level 1 holds the finest cells, level ``T`` a single cell
covering the whole region whose head is the sink.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._validation import (
    InvalidParameterError,
    OutOfRangeError,
    check_int,
    check_positive,
    check_positions,
)

__all__ = [
    "NodeSet",
    "Cluster",
    "ClusterTree",
    "place_nodes",
    "build_hierarchy",
    "subtree_readings",
    "node_rows",
    "write_nodes_csv",
]

NODES_COLUMNS = ["id", "x", "y", "cluster", "role"]


@dataclass(frozen=True)
class NodeSet:
    """Sensor nodes with ids ``0..count-1`` (the array index)."""

    positions: np.ndarray
    extent: float
    sink: int
    readings: np.ndarray | None = None

    def __len__(self):
        return len(self.positions)

    @property
    def ids(self):
        return np.arange(len(self.positions))

    def with_readings(self, field):
        """Return a copy whose readings are ``field`` sampled at every node."""
        return replace(self, readings=field.sample_many(self.positions))

    def density_per_km2(self):
        return len(self) / (self.extent / 1000.0) ** 2


def place_nodes(count, extent, seed=0):
    """Place ``count`` nodes uniformly at random; the sink is nearest the center."""
    count = check_int(count, "count", minimum=1)
    extent = check_positive(extent, "extent")
    seed = check_int(seed, "seed")
    rng = np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, 0x6E6F646573]))
    positions = rng.uniform(0.0, extent, size=(count, 2))
    center = np.array([extent / 2.0, extent / 2.0])
    sink = int(np.argmin(np.linalg.norm(positions - center, axis=1)))
    return NodeSet(positions, extent, sink)


def node_set_from_positions(positions, extent=None, sink=None):
    P = check_positions(positions, "positions")
    if len(P) == 0:
        raise InvalidParameterError("at least one node is required")
    if extent is None:
        extent = float(max(P.max(), 1e-9))
    extent = check_positive(extent, "extent")
    if np.any(P < 0) or np.any(P > extent):
        raise OutOfRangeError(f"positions must lie within [0, {extent}]^2")
    if sink is None:
        c = np.array([extent / 2.0, extent / 2.0])
        sink = int(np.argmin(np.linalg.norm(P - c, axis=1)))
    return NodeSet(P, extent, int(sink))


@dataclass
class Cluster:
    """One cluster of the hierarchy.

    ``members`` lists every node in the cluster's subtree, in the canonical
    order used for reading vectors (children concatenated in child order).
    """

    level: int
    index: int
    members: tuple
    head: int
    cell: tuple  # (x0, y0, x1, y1)
    parent: int | None = None
    children: tuple = ()

    @property
    def size(self):
        return len(self.members)

    @property
    def centroid(self):
        x0, y0, x1, y1 = self.cell
        return ((x0 + x1) / 2.0, (y0 + y1) / 2.0)


@dataclass
class ClusterTree:
    n: int
    T: int
    levels: list = field(default_factory=list)  # levels[i - 1] is C_i
    node_count: int = 0

    def clusters(self, level):
        if not 1 <= level <= self.T:
            raise OutOfRangeError(f"level must be in [1, {self.T}], got {level}")
        return self.levels[level - 1]

    def cluster(self, level, index):
        cs = self.clusters(level)
        if not 0 <= index < len(cs):
            raise OutOfRangeError(f"cluster index {index} out of range at level {level}")
        return cs[index]

    @property
    def root(self):
        return self.levels[-1][0]

    def sizes(self, level):
        return np.array([c.size for c in self.clusters(level)])

    def leaf_cluster_of(self):
        """Map node id -> index of its level-1 cluster."""
        out = np.empty(self.node_count, dtype=int)
        for c in self.levels[0]:
            out[list(c.members)] = c.index
        return out

    def iter_clusters(self):
        for lvl in self.levels:
            yield from lvl


def _split_shape(n):
    k = math.isqrt(n)
    return (k, k) if k * k == n else (1, n)  # (rows along y, cols along x)


def build_hierarchy(nodes, n=4, T=4):
    """Partition ``nodes`` into a ``T``-level, ``n``-way spatial grid hierarchy.

    Empty cells are dropped, so ``|C_i| <= n**(T - i)``. Cluster heads are
    the member nearest the cell center (ties to the lower id); the level-T
    head is the sink.
    """
    n = check_int(n, "n", minimum=2)
    T = check_int(T, "T", minimum=2)
    if len(nodes) == 0:
        raise InvalidParameterError("cannot build a hierarchy over zero nodes")
    P = nodes.positions
    E = nodes.extent
    rows, cols = _split_shape(n)
    fine_rows, fine_cols = rows ** (T - 1), cols ** (T - 1)

    # finest-grid coordinates of each node; the upper edge belongs to the last cell
    cx = np.minimum((P[:, 0] / E * fine_cols).astype(int), fine_cols - 1)
    cy = np.minimum((P[:, 1] / E * fine_rows).astype(int), fine_rows - 1)

    def nearest(member_ids, cell):
        ids = np.asarray(member_ids)
        x0, y0, x1, y1 = cell
        d = np.hypot(P[ids, 0] - (x0 + x1) / 2.0, P[ids, 1] - (y0 + y1) / 2.0)
        return int(ids[np.lexsort((ids, d))[0]])

    tree = ClusterTree(n=n, T=T, node_count=len(nodes))

    # level 1: occupied finest cells in row-major order, members by id
    key = cy * fine_cols + cx
    w, h = E / fine_cols, E / fine_rows
    level = []
    cell_of = {}
    for k in np.unique(key):
        r, c = divmod(int(k), fine_cols)
        cell = (c * w, r * h, (c + 1) * w, (r + 1) * h)
        members = tuple(int(i) for i in np.flatnonzero(key == k))
        cl = Cluster(1, len(level), members, nearest(members, cell), cell)
        cell_of[(r, c)] = cl
        level.append(cl)
    tree.levels.append(level)

    for lvl in range(2, T + 1):
        scale_r, scale_c = rows ** (lvl - 1), cols ** (lvl - 1)
        grid_r, grid_c = fine_rows // scale_r, fine_cols // scale_c
        w, h = E / grid_c, E / grid_r
        groups = {}
        for (r, c), child in cell_of.items():
            groups.setdefault((r // rows, c // cols), []).append(((r % rows, c % cols), child))
        level = []
        new_cell_of = {}
        for (r, c) in sorted(groups):
            kids = [child for _, child in sorted(groups[(r, c)], key=lambda t: t[0])]
            members = tuple(m for child in kids for m in child.members)
            cell = (c * w, r * h, (c + 1) * w, (r + 1) * h)
            head = nodes.sink if lvl == T else nearest(members, cell)
            cl = Cluster(lvl, len(level), members, head, cell, children=tuple(k.index for k in kids))
            for kid in kids:
                kid.parent = cl.index
            new_cell_of[(r, c)] = cl
            level.append(cl)
        tree.levels.append(level)
        cell_of = new_cell_of
    return tree


def subtree_readings(tree, level, index, readings):
    """Readings of every node under cluster ``(level, index)`` in canonical order."""
    cl = tree.cluster(level, index)
    if hasattr(readings, "readings"):
        readings = readings.readings
    return np.asarray(readings, dtype=float)[list(cl.members)]


def node_rows(tree, nodes):
    """Yield ``[id, x, y, cluster, role]``; role is sink, head, or member."""
    leaf_of = tree.leaf_cluster_of()
    heads = {c.head for c in tree.iter_clusters()}
    for i, (x, y) in enumerate(nodes.positions):
        role = "sink" if i == nodes.sink else ("head" if i in heads else "member")
        yield [i, f"{x:.6f}", f"{y:.6f}", int(leaf_of[i]), role]


def write_nodes_csv(path, tree, nodes):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(NODES_COLUMNS)
        w.writerows(node_rows(tree, nodes))

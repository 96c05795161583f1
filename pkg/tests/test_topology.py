import numpy as np
import pytest

from ahdacs._validation import InvalidParameterError, OutOfRangeError
from ahdacs.topology import (
    build_hierarchy,
    node_set_from_positions,
    place_nodes,
    subtree_readings,
    write_nodes_csv,
)


def check_tree_invariants(tree, nodes):
    """Partition, size recursion, head membership and cluster-count bounds."""
    N = len(nodes)
    assert len(tree.clusters(tree.T)) == 1
    assert tree.root.size == N
    assert tree.root.head == nodes.sink
    for i in range(1, tree.T + 1):
        level = tree.clusters(i)
        assert len(level) <= tree.n ** (tree.T - i)
        seen = np.concatenate([np.array(c.members) for c in level])
        assert sorted(seen.tolist()) == list(range(N))
        for c in level:
            assert c.head in c.members
            assert c.index == level.index(c)
            if i > 1:
                kids = [tree.cluster(i - 1, k) for k in c.children]
                assert c.size == sum(k.size for k in kids)
                assert c.members == tuple(m for k in kids for m in k.members)
                assert all(k.parent == c.index for k in kids)


@pytest.mark.parametrize("count,density", [(300, 18.75), (400, 25.0), (800, 50.0)])
def test_density(count, density):
    assert place_nodes(count, 4000.0, seed=0).density_per_km2() == pytest.approx(density)


def test_placement_deterministic_and_in_bounds():
    a = place_nodes(400, 4000.0, seed=11)
    b = place_nodes(400, 4000.0, seed=11)
    assert a.positions.tobytes() == b.positions.tobytes()
    assert a.sink == b.sink
    assert np.all((a.positions >= 0) & (a.positions <= 4000.0))
    d = np.linalg.norm(a.positions - 2000.0, axis=1)
    assert a.sink == int(np.argmin(d))


def test_place_nodes_rejects_zero():
    with pytest.raises(InvalidParameterError):
        place_nodes(0, 4000.0)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("count", [300, 550, 800])
def test_tree_invariants(count, seed):
    nodes = place_nodes(count, 4000.0, seed=seed)
    tree = build_hierarchy(nodes, 4, 4)
    check_tree_invariants(tree, nodes)
    assert len(tree.clusters(1)) <= 64


def test_strip_split_for_non_square_branching():
    nodes = place_nodes(200, 4000.0, seed=2)
    tree = build_hierarchy(nodes, 3, 3)
    check_tree_invariants(tree, nodes)
    for c in tree.clusters(1):
        x0, y0, x1, y1 = c.cell
        assert (y0, y1) == (0.0, 4000.0)
        assert x1 - x0 == pytest.approx(4000.0 / 9)


def test_mean_leaf_cluster_size_at_400_nodes():
    means = []
    for seed in range(10):
        tree = build_hierarchy(place_nodes(400, 4000.0, seed=seed), 4, 4)
        means.append(np.mean(tree.sizes(1)))
    assert all(5.0 <= m <= 8.0 for m in means)


def test_single_node_per_leaf_cell():
    # one node at the center of each of the 16 cells of a 4x4 grid
    g = (np.arange(4) + 0.5) * 100.0
    X, Y = np.meshgrid(g, g)
    nodes = node_set_from_positions(np.column_stack([X.ravel(), Y.ravel()]), extent=400.0)
    tree = build_hierarchy(nodes, 4, 3)
    assert len(tree.clusters(1)) == 16
    assert all(c.size == 1 for c in tree.clusters(1))
    check_tree_invariants(tree, nodes)


def test_row_major_order():
    nodes = place_nodes(600, 4000.0, seed=4)
    tree = build_hierarchy(nodes, 4, 4)
    keys = [(c.cell[1], c.cell[0]) for c in tree.clusters(1)]
    assert keys == sorted(keys)


def test_build_rejects_bad_branching():
    nodes = place_nodes(50, 4000.0)
    with pytest.raises(InvalidParameterError):
        build_hierarchy(nodes, 1, 3)
    with pytest.raises(InvalidParameterError):
        build_hierarchy(nodes, 4, 1)


def test_subtree_readings(network):
    nodes, tree = network("piecewise", 400, seed=1)
    leaf = tree.cluster(1, 0)
    np.testing.assert_array_equal(subtree_readings(tree, 1, 0, nodes), nodes.readings[list(leaf.members)])
    assert len(subtree_readings(tree, tree.T, 0, nodes)) == len(nodes)
    for c in tree.clusters(3):
        parts = [subtree_readings(tree, 2, k, nodes) for k in c.children]
        np.testing.assert_array_equal(subtree_readings(tree, 3, c.index, nodes), np.concatenate(parts))
    with pytest.raises(OutOfRangeError):
        subtree_readings(tree, 1, 10_000, nodes)
    with pytest.raises(OutOfRangeError):
        subtree_readings(tree, 9, 0, nodes)


def test_nodes_csv(tmp_path, network):
    nodes, tree = network("piecewise", 300, seed=0)
    path = tmp_path / "nodes.csv"
    write_nodes_csv(path, tree, nodes)
    lines = path.read_text().splitlines()
    assert lines[0] == "id,x,y,cluster,role"
    assert len(lines) == 301
    roles = [line.split(",")[-1] for line in lines[1:]]
    assert roles.count("sink") == 1
    assert set(roles) <= {"sink", "head", "member"}

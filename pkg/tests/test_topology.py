import numpy as np
import pytest

from isingmarket.errors import ConfigError
from isingmarket.market import TopologySpec, build_topology


def _adjacency_sets(topo):
    return [set(topo.neighbors(i).tolist()) for i in range(topo.n_agents)]


def _check_invariants(topo):
    nb = _adjacency_sets(topo)
    for i, s in enumerate(nb):
        assert i not in s
        assert len(s) >= 1
        for j in s:
            assert i in nb[j]
    np.testing.assert_array_equal(topo.degree, [len(s) for s in nb])


def test_complete_graph():
    topo = build_topology(TopologySpec("complete"), 4)
    _check_invariants(topo)
    assert topo.degree.tolist() == [3, 3, 3, 3]


def test_complete_neighbor_sum_excludes_self():
    topo = build_topology(TopologySpec("complete"), 5)
    s = np.array([1.0, -1, 1, 1, -1])
    np.testing.assert_array_equal(topo.neighbor_sum(s), [0, 2, 0, 0, 2])


def test_periodic_lattice_degree_four():
    topo = build_topology(TopologySpec("lattice2d", width=3, height=3, periodic=True), 9)
    _check_invariants(topo)
    assert topo.degree.tolist() == [4] * 9


def test_open_lattice_degrees():
    topo = build_topology(TopologySpec("lattice2d", width=3, height=3, periodic=False), 9)
    _check_invariants(topo)
    assert topo.degree.reshape(3, 3).tolist() == [[2, 3, 2], [3, 4, 3], [2, 3, 2]]


def test_lattice_neighbor_sum_matches_lists():
    topo = build_topology(TopologySpec("lattice2d", width=4, height=5), 20)
    s = np.random.default_rng(0).choice([-1.0, 1.0], 20)
    expected = [s[topo.neighbors(i)].sum() for i in range(20)]
    np.testing.assert_array_equal(topo.neighbor_sum(s), expected)


def test_erdos_renyi_mean_degree():
    topo = build_topology(TopologySpec("erdos_renyi", p=0.1, seed=42), 100)
    _check_invariants(topo)
    assert 7 <= topo.degree.mean() <= 13


def test_erdos_renyi_deterministic():
    a = build_topology(TopologySpec("erdos_renyi", p=0.2, seed=5), 30)
    b = build_topology(TopologySpec("erdos_renyi", p=0.2, seed=5), 30)
    assert (a.adjacency != b.adjacency).nnz == 0


def test_erdos_renyi_gives_up_on_isolated_agents():
    with pytest.raises(ConfigError, match="isolated"):
        build_topology(TopologySpec("erdos_renyi", p=1e-6, seed=0), 50)


@pytest.mark.parametrize(
    "spec",
    [
        dict(kind="lattice2d", width=1, height=5),
        dict(kind="lattice2d", width=3),
        dict(kind="erdos_renyi", p=0.0),
        dict(kind="ring"),
    ],
)
def test_impossible_specs(spec):
    with pytest.raises(ConfigError):
        TopologySpec(**spec)


def test_lattice_size_mismatch():
    with pytest.raises(ConfigError):
        build_topology(TopologySpec("lattice2d", width=3, height=3), 10)

"""Agent interaction graphs.

The complete graph is kept implicit (neighbor sum = total - own spin) so that
large populations do not materialize an N x N adjacency structure.  Other
graphs are stored as symmetric CSR matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy import sparse

from ..errors import ConfigError

TOPOLOGY_KINDS = ("complete", "lattice2d", "erdos_renyi")

_ER_MAX_ATTEMPTS = 100


@dataclass(frozen=True)
class TopologySpec:
    """Declarative description of a graph; :func:`build_topology` realizes it."""

    kind: str = "complete"
    width: int | None = None
    height: int | None = None
    periodic: bool = True
    p: float | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in TOPOLOGY_KINDS:
            raise ConfigError(f"topology kind must be one of {TOPOLOGY_KINDS}, got {self.kind!r}")
        if self.kind == "lattice2d":
            if self.width is None or self.height is None:
                raise ConfigError("lattice2d topology needs width and height")
            if self.width < 2 or self.height < 2:
                raise ConfigError("lattice2d dimensions must be >= 2")
        if self.kind == "erdos_renyi":
            if self.p is None or not (0.0 < self.p <= 1.0):
                raise ConfigError(f"erdos_renyi edge probability must be in (0, 1], got {self.p}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "width": self.width,
            "height": self.height,
            "periodic": self.periodic,
            "p": self.p,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "TopologySpec":
        return cls(**d)


@dataclass(frozen=True, eq=False)
class Topology:
    kind: str
    n_agents: int
    adjacency: sparse.csr_matrix | None = field(repr=False, default=None)

    @property
    def degree(self) -> NDArray[np.int64]:
        if self.adjacency is None:
            return np.full(self.n_agents, self.n_agents - 1, dtype=np.int64)
        return np.diff(self.adjacency.indptr).astype(np.int64)

    def neighbors(self, i: int) -> NDArray[np.int64]:
        if self.adjacency is None:
            return np.concatenate([np.arange(i), np.arange(i + 1, self.n_agents)])
        a = self.adjacency
        return a.indices[a.indptr[i]:a.indptr[i + 1]].astype(np.int64)

    def neighbor_sum(self, spins: NDArray[np.float64]) -> NDArray[np.float64]:
        """Sum of neighbor spins for every agent (own spin excluded)."""
        if self.adjacency is None:
            return spins.sum() - spins
        return self.adjacency @ spins

    def neighbor_sum_one(self, spins: NDArray[np.float64], i: int, total: float | None = None) -> float:
        if self.adjacency is None:
            tot = spins.sum() if total is None else total
            return float(tot - spins[i])
        a = self.adjacency
        return float(spins[a.indices[a.indptr[i]:a.indptr[i + 1]]].sum())


def _from_edges(n: int, rows: NDArray, cols: NDArray) -> sparse.csr_matrix:
    data = np.ones(rows.size, dtype=np.float64)
    a = sparse.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    a = ((a + a.T) > 0).astype(np.float64).tocsr()
    a.setdiag(0)
    a.eliminate_zeros()
    a.sort_indices()
    return a


def _lattice(width: int, height: int, periodic: bool) -> sparse.csr_matrix:
    n = width * height
    idx = np.arange(n).reshape(height, width)
    rows, cols = [], []
    # right and down links; symmetrization adds the reverse direction
    if periodic:
        rows += [idx.ravel(), idx.ravel()]
        cols += [np.roll(idx, -1, axis=1).ravel(), np.roll(idx, -1, axis=0).ravel()]
    else:
        rows += [idx[:, :-1].ravel(), idx[:-1, :].ravel()]
        cols += [idx[:, 1:].ravel(), idx[1:, :].ravel()]
    return _from_edges(n, np.concatenate(rows), np.concatenate(cols))


def _erdos_renyi(n: int, p: float, rng: np.random.Generator) -> sparse.csr_matrix:
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    return _from_edges(n, iu[keep], ju[keep])


def build_topology(spec: TopologySpec, n_agents: int, seed: int | None = None) -> Topology:
    """Realize ``spec`` for ``n_agents`` agents.

    ``seed`` is used for random graphs when the spec carries none.  Random
    graphs are redrawn until no agent is isolated, at most 100 times.
    """
    if n_agents < 2:
        raise ConfigError("n_agents >= 2 required")
    if spec.kind == "complete":
        return Topology("complete", n_agents, None)
    if spec.kind == "lattice2d":
        if spec.width * spec.height != n_agents:
            raise ConfigError(
                f"lattice2d {spec.width}x{spec.height} holds {spec.width * spec.height} agents, "
                f"but n_agents = {n_agents}"
            )
        adj = _lattice(spec.width, spec.height, spec.periodic)
        return Topology("lattice2d", n_agents, adj)
    s = spec.seed if spec.seed is not None else seed
    rng = np.random.default_rng(s)
    for _ in range(_ER_MAX_ATTEMPTS):
        adj = _erdos_renyi(n_agents, spec.p, rng)
        if np.all(np.diff(adj.indptr) > 0):
            return Topology("erdos_renyi", n_agents, adj)
    raise ConfigError(
        f"erdos_renyi(n={n_agents}, p={spec.p}) left isolated agents in {_ER_MAX_ATTEMPTS} attempts"
    )

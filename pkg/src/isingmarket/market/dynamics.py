"""Kinetic Ising market: agent decisions and price formation.

Each agent holds ``s_i = +1`` (buy) or ``-1`` (sell).  An agent forecasts the
price drift from its neighbors' positions plus a private noise draw and takes
the sign of that forecast, which maximizes its expected profit.  With logistic
private noise this is Glauber dynamics: ``P(s_i = +1 | h) = 1 / (1 + exp(-h/T))``.
The order imbalance ``m = mean(s)`` then moves the price through the impact
function ``F``.

Timing within one step ``t``: schedules are evaluated, agents decide from the
previous spins (positions taken at ``t-1``), and the price ``p(t)`` forms from
the new imbalance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..errors import DomainError, SimulationError
from .config import MarketConfig, MarketState
from .topology import Topology, build_topology

__all__ = [
    "Trajectory",
    "agent_update",
    "price_update",
    "expected_pnl",
    "run_simulation",
    "initial_state",
]


def _topology_for(config: MarketConfig, topology: Topology | None) -> Topology:
    if topology is not None:
        return topology
    return build_topology(config.topology, config.n_agents, seed=config.seed)


def _norm(config: MarketConfig, topology: Topology) -> NDArray[np.float64] | float:
    if config.normalization == "degree":
        return topology.degree.astype(float)
    return float(config.n_agents)


def _sign_keep(x: NDArray[np.float64], previous: NDArray[np.float64]) -> NDArray[np.float64]:
    # sign(0) keeps the previous position
    return np.where(x > 0, 1.0, np.where(x < 0, -1.0, previous))


def agent_update(
    state: MarketState,
    config: MarketConfig,
    lambda_t: float,
    field_t: float,
    rng: np.random.Generator,
    *,
    topology: Topology | None = None,
    noise: NDArray[np.float64] | None = None,
) -> NDArray[np.float64]:
    """New spin vector from the profit-maximizing sign rule.

    Agent ``i`` takes ``sign(lambda_t / norm_i * sum_{j in N(i)} s_j + field_t + noise_i)``.
    ``noise`` injects the already-scaled private draws (one per agent); when
    omitted they are drawn from ``rng``.  In ``random_sequential`` mode the
    visiting order is a permutation drawn from ``rng`` after the noise.
    """
    if lambda_t < 0 or not math.isfinite(lambda_t):
        raise DomainError(f"lambda_t must be finite and >= 0, got {lambda_t}")
    topo = _topology_for(config, topology)
    n = config.n_agents
    spins = state.spins
    if noise is None:
        noise = config.noise.draw_agent(rng, n)
    else:
        noise = np.asarray(noise, dtype=float)
        if noise.shape != (n,):
            raise DomainError(f"injected noise must have shape ({n},)")
    norm = _norm(config, topo)

    if config.update_scheme == "synchronous":
        x = lambda_t / norm * topo.neighbor_sum(spins) + field_t + noise
        return _sign_keep(x, spins)

    order = rng.permutation(n)
    new = spins.copy()
    coef = lambda_t / norm
    per_agent = np.ndim(coef) > 0
    total = float(new.sum())
    for i in order:
        c = coef[i] if per_agent else coef
        x = c * topo.neighbor_sum_one(new, i, total) + field_t + noise[i]
        if x > 0:
            s = 1.0
        elif x < 0:
            s = -1.0
        else:
            continue
        if s != new[i]:
            total += s - new[i]
            new[i] = s
    return new


def expected_pnl(
    agent_index: int,
    state: MarketState,
    config: MarketConfig,
    lambda_t: float,
    *,
    field_t: float = 0.0,
    noise: float = 0.0,
    topology: Topology | None = None,
) -> dict[int, float]:
    """Conditional expected profit of agent ``agent_index`` for each candidate spin.

    The agent's forecast of the relative price change is
    ``lambda_t / norm * (neighbor sum) + field_t + noise``; the profit of holding
    ``s`` from ``t-1`` to ``t`` is that forecast times ``p(t-1) * s``.
    Returns ``{+1: pnl_plus, -1: pnl_minus}``.
    """
    n = config.n_agents
    if not (0 <= agent_index < n):
        raise DomainError(f"agent index {agent_index} out of range for {n} agents")
    topo = _topology_for(config, topology)
    norm = _norm(config, topo)
    c = norm[agent_index] if np.ndim(norm) else norm
    drift = lambda_t / c * topo.neighbor_sum_one(state.spins, agent_index) + field_t + noise
    return {+1: drift * state.price, -1: -drift * state.price}


def price_update(
    state: MarketState,
    config: MarketConfig,
    rng: np.random.Generator,
    *,
    eta: float | None = None,
) -> float:
    """Next price from the current order imbalance.

    ``(p(t) - p(t-1)) / p(t-1) = F(m) + sigma * eta`` in raw mode;
    ``ln p(t) = ln p(t-1) + F(m) + sigma * eta`` in log mode.
    """
    m = float(state.spins.mean())
    if eta is None:
        eta = rng.standard_normal()
    r = config.impact(m) + config.noise.price_sigma * eta
    if config.price_mode == "log":
        return float(state.price * math.exp(r))
    p = state.price * (1.0 + r)
    if not (p > 0 and math.isfinite(p)):
        raise SimulationError(
            f"raw price update gave p = {p} at t = {state.t + 1} (return {r:.6g}); "
            "use price_mode = 'log' to guarantee positive prices"
        )
    return float(p)


@dataclass(eq=False)
class Trajectory:
    """Per-step simulation output, one entry per step ``t = 1..horizon``.

    ``magnetization[k]`` is the imbalance that formed ``price[k]``.
    """

    t: NDArray[np.int64]
    price: NDArray[np.float64]
    log_return: NDArray[np.float64]
    magnetization: NDArray[np.float64]
    lambda_: NDArray[np.float64]
    field: NDArray[np.float64]

    def __len__(self) -> int:
        return int(self.t.size)

    def equals(self, other: "Trajectory") -> bool:
        return all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("t", "price", "log_return", "magnetization", "lambda_", "field")
        )


def _streams(seed: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(5)
    return [np.random.default_rng(c) for c in children]


def initial_state(config: MarketConfig, rng: np.random.Generator) -> MarketState:
    spins = rng.choice(np.array([-1.0, 1.0]), size=config.n_agents)
    return MarketState(spins, config.initial_price, 0)


def run_simulation(config: MarketConfig, *, topology: Topology | None = None) -> Trajectory:
    """Run ``config.horizon`` steps; bitwise deterministic in ``config.seed``.

    Independent streams (spawned from the seed) feed the initial spins, the
    agent decisions, the price noise, the coupling schedule and the field.
    """
    topo = _topology_for(config, topology)
    init_rng, agent_rng, price_rng, coupling_rng, field_rng = _streams(config.seed)
    state = initial_state(config, init_rng)
    horizon = config.horizon
    lam = config.coupling.values(horizon, coupling_rng)
    fld = config.field.values(horizon, field_rng)

    price = np.empty(horizon)
    log_ret = np.empty(horizon)
    mag = np.empty(horizon)
    for k in range(horizon):
        state.spins = agent_update(state, config, float(lam[k]), float(fld[k]), agent_rng, topology=topo)
        mag[k] = state.spins.mean()
        p_new = price_update(state, config, price_rng)
        log_ret[k] = math.log(p_new / state.price)
        price[k] = p_new
        state.price = p_new
        state.t += 1
    return Trajectory(
        t=np.arange(1, horizon + 1, dtype=np.int64),
        price=price,
        log_return=log_ret,
        magnetization=mag,
        lambda_=lam,
        field=fld,
    )

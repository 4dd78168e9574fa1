"""Kinetic Ising market simulation."""

from .config import (
    CouplingSchedule,
    FieldSchedule,
    ImpactFunction,
    MarketConfig,
    MarketState,
    NoiseSpec,
)
from .dynamics import Trajectory, agent_update, expected_pnl, price_update, run_simulation
from .experiments import (
    NivolResult,
    SweepResult,
    derive_seed,
    meanfield_critical_coupling,
    meanfield_magnetization,
    meanfield_response,
    noise_induced_volatility_experiment,
    sweep_coupling,
)
from .topology import Topology, TopologySpec, build_topology

__all__ = [
    "CouplingSchedule",
    "FieldSchedule",
    "ImpactFunction",
    "MarketConfig",
    "MarketState",
    "NoiseSpec",
    "Topology",
    "TopologySpec",
    "build_topology",
    "Trajectory",
    "agent_update",
    "expected_pnl",
    "price_update",
    "run_simulation",
    "NivolResult",
    "SweepResult",
    "derive_seed",
    "meanfield_critical_coupling",
    "meanfield_magnetization",
    "meanfield_response",
    "noise_induced_volatility_experiment",
    "sweep_coupling",
]

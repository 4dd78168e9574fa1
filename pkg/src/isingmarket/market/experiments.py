"""Multi-run experiments and the mean-field reference they are compared with."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special, stats

from ..errors import DomainError
from .config import CouplingSchedule, FieldSchedule, MarketConfig, NoiseSpec
from .dynamics import run_simulation

__all__ = [
    "meanfield_critical_coupling",
    "meanfield_response",
    "meanfield_magnetization",
    "derive_seed",
    "SweepResult",
    "sweep_coupling",
    "NivolResult",
    "noise_induced_volatility_experiment",
    "default_burn_in",
]


def default_burn_in(horizon: int) -> int:
    return int(0.2 * horizon)


def meanfield_critical_coupling(noise: NoiseSpec) -> float:
    """Critical imitation strength of the complete-graph model.

    The mean-field self-consistency ``m = g(lambda * m)`` with
    ``g(h) = 2 P(s = +1 | h) - 1`` loses stability of ``m = 0`` when
    ``lambda * g'(0) = 1``.  Logistic noise: ``lambda_c = 2 * sigma_a * scale``.
    Gaussian noise: ``lambda_c = sigma_a * std * sqrt(pi / 2)``.
    """
    if noise.agent == "logistic":
        return 2.0 * noise.agent_sigma * noise.agent_scale
    if noise.agent == "gaussian":
        return noise.agent_sigma * noise.agent_scale * math.sqrt(math.pi / 2)
    raise DomainError(f"no mean-field critical point for agent noise {noise.agent!r}")


def meanfield_response(h: ArrayLike, noise: NoiseSpec) -> NDArray[np.float64]:
    """Expected spin ``2 P(s = +1 | h) - 1`` for local field ``h``."""
    h = np.asarray(h, dtype=float)
    width = noise.agent_sigma * noise.agent_scale
    if noise.agent == "logistic":
        return np.tanh(h / (2.0 * width))
    return special.erf(h / (width * math.sqrt(2.0)))


def meanfield_magnetization(
    lam: float,
    noise: NoiseSpec,
    *,
    start: float = 1.0,
    tol: float = 1e-14,
    max_iter: int = 100_000,
) -> float:
    """Stable root of ``m = g(lam * m)`` by fixed-point iteration from ``start``."""
    m = float(start)
    for _ in range(max_iter):
        m_new = float(meanfield_response(lam * m, noise))
        if abs(m_new - m) < tol:
            return m_new
        m = m_new
    return m


def derive_seed(seed: int, index: int) -> int:
    """Seed of the ``index``-th independent job spawned from ``seed``."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, np.uint64)[0] >> 1)


def _map(fn: Callable, items: Iterable, jobs: int) -> list:
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


@dataclass(eq=False)
class SweepResult:
    lambda_: NDArray[np.float64]
    mean_abs_m: NDArray[np.float64]
    susceptibility: NDArray[np.float64]
    n_samples: NDArray[np.int64]

    @property
    def peak_lambda(self) -> float:
        return float(self.lambda_[int(np.argmax(self.susceptibility))])

    def equals(self, other: "SweepResult") -> bool:
        return all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("lambda_", "mean_abs_m", "susceptibility", "n_samples")
        )


def _sweep_job(args: tuple[MarketConfig, int, int]) -> tuple[float, float, int]:
    config, burn_in, measure = args
    m = run_simulation(config).magnetization[burn_in:burn_in + measure]
    return float(np.abs(m).mean()), float(config.n_agents * m.var()), int(m.size)


def sweep_coupling(
    config: MarketConfig,
    lambda_grid: Sequence[float],
    burn_in: int,
    measure_steps: int,
    *,
    jobs: int = 1,
) -> SweepResult:
    """Order parameter and susceptibility ``N * Var(m)`` along a constant-coupling grid.

    Grid point ``i`` is an independent run with seed ``derive_seed(config.seed, i)``.
    """
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise DomainError("lambda grid must be a non-empty 1-d sequence")
    if np.any(np.diff(grid) < 0):
        raise DomainError("lambda grid must be sorted ascending")
    if np.any(grid < 0):
        raise DomainError("lambda grid values must be >= 0")
    if burn_in < 0 or measure_steps < 2:
        raise DomainError("burn_in >= 0 and measure_steps >= 2 required")
    if burn_in + measure_steps > config.horizon:
        raise DomainError(
            f"burn_in + measure_steps = {burn_in + measure_steps} exceeds horizon {config.horizon}"
        )
    jobs_args = [
        (config.with_(coupling=CouplingSchedule.constant(float(lam)), seed=derive_seed(config.seed, i)),
         burn_in, measure_steps)
        for i, lam in enumerate(grid)
    ]
    out = _map(_sweep_job, jobs_args, jobs)
    return SweepResult(
        lambda_=grid,
        mean_abs_m=np.array([o[0] for o in out]),
        susceptibility=np.array([o[1] for o in out]),
        n_samples=np.array([o[2] for o in out], dtype=np.int64),
    )


@dataclass(eq=False)
class NivolResult:
    """Paired magnetization volatilities with the field off and on."""

    baseline: NDArray[np.float64]
    driven: NDArray[np.float64]
    wins: int
    ties: int
    p_value: float

    @property
    def baseline_volatility(self) -> float:
        return float(self.baseline.mean())

    @property
    def driven_volatility(self) -> float:
        return float(self.driven.mean())

    @property
    def n_pairs(self) -> int:
        return int(self.baseline.size)


def _nivol_job(args: tuple[MarketConfig, int]) -> float:
    config, burn_in = args
    return float(run_simulation(config).magnetization[burn_in:].std())


def noise_induced_volatility_experiment(
    config_base: MarketConfig,
    field_amplitude: float,
    field_period: float,
    n_seeds: int,
    *,
    field_kind: str = "square_wave",
    burn_in: int | None = None,
    jobs: int = 1,
) -> NivolResult:
    """Does a rapidly alternating news field raise collective fluctuations?

    For each seed the base configuration runs twice, without field and with a
    periodic field of the given amplitude; both runs share all random
    streams.  The one-sided sign test counts pairs where the driven
    magnetization std exceeds the baseline, ties dropped.
    """
    if n_seeds < 1:
        raise DomainError("n_seeds must be >= 1")
    if field_kind not in ("square_wave", "sinusoid"):
        raise DomainError(f"field_kind must be square_wave or sinusoid, got {field_kind!r}")
    burn = default_burn_in(config_base.horizon) if burn_in is None else int(burn_in)
    if not (0 <= burn < config_base.horizon - 1):
        raise DomainError("burn_in must leave at least 2 measured steps")
    off = FieldSchedule(kind="none")
    on = FieldSchedule(kind=field_kind, amplitude=float(field_amplitude), period=float(field_period))
    args = []
    for i in range(n_seeds):
        seeded = config_base.with_(seed=derive_seed(config_base.seed, i))
        args.append((seeded.with_(field=off), burn))
        args.append((seeded.with_(field=on), burn))
    vols = np.array(_map(_nivol_job, args, jobs))
    baseline, driven = vols[0::2], vols[1::2]
    wins = int(np.sum(driven > baseline))
    ties = int(np.sum(driven == baseline))
    n_eff = n_seeds - ties
    p = 1.0 if n_eff == 0 else float(stats.binomtest(wins, n_eff, 0.5, alternative="greater").pvalue)
    return NivolResult(baseline=baseline, driven=driven, wins=wins, ties=ties, p_value=p)

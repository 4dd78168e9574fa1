"""Value types describing a market simulation."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from dataclasses import field as dc_field
from typing import Any

import numpy as np
from numpy.typing import NDArray

from ..errors import ConfigError
from .topology import TopologySpec

IMPACT_KINDS = ("linear", "square_root")
AGENT_NOISE_KINDS = ("logistic", "gaussian")
COUPLING_KINDS = ("constant", "linear_ramp", "sinusoid", "ou_process")
FIELD_KINDS = ("none", "sinusoid", "square_wave", "iid_shocks")
UPDATE_SCHEMES = ("synchronous", "random_sequential")
PRICE_MODES = ("log", "raw")
NORMALIZATIONS = ("n_agents", "degree")


def _finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value}")


def _positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0):
        raise ConfigError(f"{name} must be > 0, got {value}")


@dataclass(frozen=True)
class ImpactFunction:
    """Price impact ``F`` of the order imbalance.

    ``linear``: ``F(x) = lam * x``.  ``square_root``: ``F(x) = lam * sign(x) * sqrt(|x|)``.
    Both are odd, increasing and vanish at 0.
    """

    kind: str = "linear"
    lam: float = 0.01

    def __post_init__(self) -> None:
        if self.kind not in IMPACT_KINDS:
            raise ConfigError(f"impact kind must be one of {IMPACT_KINDS}, got {self.kind!r}")
        _positive("impact lambda", self.lam)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "linear":
            out = self.lam * x
        else:
            out = self.lam * np.sign(x) * np.sqrt(np.abs(x))
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "lambda": self.lam}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ImpactFunction":
        return cls(kind=d["kind"], lam=d["lambda"])


@dataclass(frozen=True)
class NoiseSpec:
    """Idiosyncratic agent noise and exogenous price noise.

    Each agent adds ``agent_sigma * eta_i`` to its decision argument, where
    ``eta_i`` is logistic with scale ``agent_scale`` or Gaussian with standard
    deviation ``agent_scale``.  ``price_sigma`` is the price volatility per
    unit time multiplying a standard Gaussian.
    """

    agent: str = "logistic"
    agent_scale: float = 1.0
    agent_sigma: float = 1.0
    price_sigma: float = 0.01

    def __post_init__(self) -> None:
        if self.agent not in AGENT_NOISE_KINDS:
            raise ConfigError(f"agent noise must be one of {AGENT_NOISE_KINDS}, got {self.agent!r}")
        _positive("agent noise scale", self.agent_scale)
        _positive("agent noise sigma", self.agent_sigma)
        if not (math.isfinite(self.price_sigma) and self.price_sigma >= 0):
            raise ConfigError(f"price_sigma must be >= 0, got {self.price_sigma}")

    def draw_agent(self, rng: np.random.Generator, size: int) -> NDArray[np.float64]:
        if self.agent == "logistic":
            eta = rng.logistic(0.0, self.agent_scale, size)
        else:
            eta = rng.normal(0.0, self.agent_scale, size)
        return self.agent_sigma * eta

    def to_dict(self) -> dict[str, Any]:
        return {
            "agent": self.agent,
            "agent_scale": self.agent_scale,
            "agent_sigma": self.agent_sigma,
            "price_sigma": self.price_sigma,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "NoiseSpec":
        return cls(**d)


@dataclass(frozen=True)
class CouplingSchedule:
    """Imitation strength over time; output is clamped at 0.

    kinds and the fields they read:

    - ``constant``: ``value``
    - ``linear_ramp``: ``start`` -> ``end`` over the horizon
    - ``sinusoid``: ``mean + amplitude * sin(2 pi t / period)``
    - ``ou_process``: Ornstein-Uhlenbeck around ``mean`` with per-step
      ``reversion`` rate and ``vol``, started at ``mean``; ``seed`` falls back
      to a stream derived from the run seed.
    """

    kind: str = "constant"
    value: float = 0.0
    start: float = 0.0
    end: float = 0.0
    mean: float = 0.0
    amplitude: float = 0.0
    period: float = 100.0
    reversion: float = 0.01
    vol: float = 0.0
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in COUPLING_KINDS:
            raise ConfigError(f"coupling kind must be one of {COUPLING_KINDS}, got {self.kind!r}")
        for name in ("value", "start", "end", "mean", "amplitude"):
            _finite(f"coupling {name}", getattr(self, name))
        if self.kind == "constant" and self.value < 0:
            raise ConfigError(f"constant coupling must be >= 0, got {self.value}")
        if self.kind == "sinusoid":
            _positive("coupling period", self.period)
        if self.kind == "ou_process":
            if not (0 < self.reversion <= 1):
                raise ConfigError(f"ou reversion must be in (0, 1], got {self.reversion}")
            if not (math.isfinite(self.vol) and self.vol >= 0):
                raise ConfigError(f"ou vol must be >= 0, got {self.vol}")

    @classmethod
    def constant(cls, value: float) -> "CouplingSchedule":
        return cls(kind="constant", value=value)

    def values(self, horizon: int, rng: np.random.Generator | None = None) -> NDArray[np.float64]:
        t = np.arange(horizon, dtype=float)
        if self.kind == "constant":
            lam = np.full(horizon, self.value)
        elif self.kind == "linear_ramp":
            frac = t / (horizon - 1) if horizon > 1 else np.zeros(horizon)
            lam = self.start + (self.end - self.start) * frac
        elif self.kind == "sinusoid":
            lam = self.mean + self.amplitude * np.sin(2 * np.pi * t / self.period)
        else:
            if self.seed is not None:
                rng = np.random.default_rng(self.seed)
            elif rng is None:
                raise ConfigError("ou_process coupling needs a seed or an rng")
            shocks = rng.standard_normal(horizon)
            lam = np.empty(horizon)
            x = self.mean
            keep = 1.0 - self.reversion
            for i in range(horizon):
                lam[i] = x
                x = self.mean + keep * (x - self.mean) + self.vol * shocks[i]
        return np.maximum(lam, 0.0)

    def to_dict(self) -> dict[str, Any]:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CouplingSchedule":
        return cls(**d)


@dataclass(frozen=True)
class FieldSchedule:
    """Global news field added to every agent's decision argument.

    ``square_wave`` is ``+amplitude`` for the first half of each period and
    ``-amplitude`` for the second half.
    """

    kind: str = "none"
    amplitude: float = 0.0
    period: float = 10.0
    std: float = 0.0
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in FIELD_KINDS:
            raise ConfigError(f"field kind must be one of {FIELD_KINDS}, got {self.kind!r}")
        _finite("field amplitude", self.amplitude)
        if self.kind in ("sinusoid", "square_wave"):
            _positive("field period", self.period)
        if not (math.isfinite(self.std) and self.std >= 0):
            raise ConfigError(f"field std must be >= 0, got {self.std}")

    def values(self, horizon: int, rng: np.random.Generator | None = None) -> NDArray[np.float64]:
        t = np.arange(horizon, dtype=float)
        if self.kind == "none":
            return np.zeros(horizon)
        if self.kind == "sinusoid":
            return self.amplitude * np.sin(2 * np.pi * t / self.period)
        if self.kind == "square_wave":
            phase = np.mod(t, self.period)
            return np.where(phase < self.period / 2, self.amplitude, -self.amplitude)
        if self.seed is not None:
            rng = np.random.default_rng(self.seed)
        elif rng is None:
            raise ConfigError("iid_shocks field needs a seed or an rng")
        return self.std * rng.standard_normal(horizon)

    def to_dict(self) -> dict[str, Any]:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "FieldSchedule":
        return cls(**d)


@dataclass(frozen=True)
class MarketConfig:
    """Every parameter of one simulation run.

    ``normalization`` selects the divisor of the neighbor sum: ``n_agents``
    (total population, the default) or ``degree`` (each agent's own number
    of neighbors).  ``price_mode='log'`` integrates log-prices and cannot
    produce a non-positive price; ``'raw'`` applies the multiplicative
    return literally and fails if the price leaves (0, inf).
    """

    n_agents: int = 100
    topology: TopologySpec = dc_field(default_factory=TopologySpec)
    impact: ImpactFunction = dc_field(default_factory=ImpactFunction)
    noise: NoiseSpec = dc_field(default_factory=NoiseSpec)
    coupling: CouplingSchedule = dc_field(default_factory=CouplingSchedule)
    field: FieldSchedule = dc_field(default_factory=FieldSchedule)
    update_scheme: str = "synchronous"
    horizon: int = 1000
    initial_price: float = 100.0
    seed: int = 0
    price_mode: str = "log"
    normalization: str = "n_agents"

    def __post_init__(self) -> None:
        if int(self.n_agents) != self.n_agents or self.n_agents < 2:
            raise ConfigError(f"n_agents >= 2 required, got {self.n_agents}")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ConfigError(f"horizon >= 1 required, got {self.horizon}")
        if self.update_scheme not in UPDATE_SCHEMES:
            raise ConfigError(f"update_scheme must be one of {UPDATE_SCHEMES}, got {self.update_scheme!r}")
        if self.price_mode not in PRICE_MODES:
            raise ConfigError(f"price_mode must be one of {PRICE_MODES}, got {self.price_mode!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"normalization must be one of {NORMALIZATIONS}, got {self.normalization!r}")
        _positive("initial_price", self.initial_price)
        if self.topology.kind == "lattice2d" and self.topology.width * self.topology.height != self.n_agents:
            raise ConfigError(
                f"lattice2d {self.topology.width}x{self.topology.height} does not hold n_agents = {self.n_agents}"
            )

    def with_(self, **changes: Any) -> "MarketConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_agents": self.n_agents,
            "topology": self.topology.to_dict(),
            "impact": self.impact.to_dict(),
            "noise": self.noise.to_dict(),
            "coupling": self.coupling.to_dict(),
            "field": self.field.to_dict(),
            "update_scheme": self.update_scheme,
            "horizon": self.horizon,
            "initial_price": self.initial_price,
            "seed": self.seed,
            "price_mode": self.price_mode,
            "normalization": self.normalization,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "MarketConfig":
        d = dict(d)
        return cls(
            topology=TopologySpec.from_dict(d.pop("topology")),
            impact=ImpactFunction.from_dict(d.pop("impact")),
            noise=NoiseSpec.from_dict(d.pop("noise")),
            coupling=CouplingSchedule.from_dict(d.pop("coupling")),
            field=FieldSchedule.from_dict(d.pop("field")),
            **d,
        )


@dataclass
class MarketState:
    """Spins ``s_i(t)`` in {-1, +1}, current price and time index."""

    spins: NDArray[np.float64]
    price: float
    t: int = 0

    def __post_init__(self) -> None:
        self.spins = np.asarray(self.spins, dtype=float)
        if not np.all(np.abs(self.spins) == 1.0):
            raise ConfigError("spins must all be -1 or +1")
        _positive("price", self.price)

    @property
    def magnetization(self) -> float:
        return float(self.spins.mean())

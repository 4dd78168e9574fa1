"""Random utility models: Gumbel noise, logit probabilities and IIA.

A decision maker picks the alternative with the largest realized utility
``U(x) = V(x) + eps(x)``.  When the ``eps`` are i.i.d. Gumbel with scale
``gamma`` the choice probabilities take the closed logit form
``exp(V/gamma) / sum(exp(V/gamma))``, i.e. a Boltzmann distribution over
states of energy ``-V`` at temperature ``gamma``.

Logit derivations fix the Gumbel location to 0; :class:`GumbelParams` keeps
``mu`` for general-purpose sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError

__all__ = [
    "GumbelParams",
    "ChoiceProblem",
    "gumbel_cdf",
    "gumbel_from_uniform",
    "sample_gumbel",
    "logit_probabilities",
    "simulate_choices",
    "iia_ratio_check",
    "entropy",
    "total_variation",
]

# rows per Monte Carlo chunk in simulate_choices; bounds peak memory
_CHUNK = 1 << 18


@dataclass(frozen=True)
class GumbelParams:
    """Location ``mu`` and scale ``gamma`` of a Gumbel (type I extreme value) law."""

    mu: float = 0.0
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.mu):
            raise DomainError(f"Gumbel location must be finite, got {self.mu}")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise DomainError(f"Gumbel scale must be > 0, got {self.gamma}")


@dataclass(frozen=True)
class ChoiceProblem:
    """Deterministic utilities ``V(x)`` of each alternative and the noise scale."""

    deterministic_utilities: tuple[float, ...]
    gamma: float = 1.0

    def __init__(self, deterministic_utilities: ArrayLike, gamma: float = 1.0):
        v = tuple(float(x) for x in np.asarray(deterministic_utilities, dtype=float).ravel())
        if len(v) < 2:
            raise DomainError("a choice problem needs at least 2 alternatives")
        if not all(math.isfinite(x) for x in v):
            raise DomainError("deterministic utilities must be finite")
        if not (math.isfinite(gamma) and gamma > 0):
            raise DomainError(f"gamma must be > 0, got {gamma}")
        object.__setattr__(self, "deterministic_utilities", v)
        object.__setattr__(self, "gamma", float(gamma))

    @property
    def utilities(self) -> NDArray[np.float64]:
        return np.array(self.deterministic_utilities)

    @property
    def n_alternatives(self) -> int:
        return len(self.deterministic_utilities)


def gumbel_cdf(x: ArrayLike, params: GumbelParams = GumbelParams()) -> float | NDArray[np.float64]:
    """Gumbel CDF ``exp(-exp(-(x - mu)/gamma))``.

    Accepts scalars or arrays; non-finite input raises :class:`DomainError`.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("gumbel_cdf requires finite arguments")
    z = (arr - params.mu) / params.gamma
    with np.errstate(over="ignore"):
        out = np.exp(-np.exp(-z))
    return float(out) if out.ndim == 0 else out


def gumbel_from_uniform(u: ArrayLike, params: GumbelParams = GumbelParams()) -> float | NDArray[np.float64]:
    """Inverse CDF: map ``u`` in (0, 1) to ``mu - gamma * ln(-ln u)``."""
    arr = np.asarray(u, dtype=float)
    if np.any((arr <= 0) | (arr >= 1)):
        raise DomainError("uniform variates must lie strictly inside (0, 1)")
    out = params.mu - params.gamma * np.log(-np.log(arr))
    return float(out) if out.ndim == 0 else out


def _open_uniform(rng: np.random.Generator, size) -> NDArray[np.float64]:
    # Generator.random is [0, 1); nudge the measure-zero endpoint inside
    u = rng.random(size)
    return np.maximum(u, np.finfo(float).tiny)


def sample_gumbel(
    rng: np.random.Generator,
    params: GumbelParams = GumbelParams(),
    size: int | tuple[int, ...] | None = None,
) -> float | NDArray[np.float64]:
    """Draw Gumbel variates by inverse-CDF transform of seeded uniforms."""
    u = _open_uniform(rng, size)
    out = params.mu - params.gamma * np.log(-np.log(u))
    return float(out) if size is None else out


def logit_probabilities(problem: ChoiceProblem) -> NDArray[np.float64]:
    """Closed-form logit choice probabilities, computed as a stable softmax."""
    z = problem.utilities / problem.gamma
    z = z - z.max()
    w = np.exp(z)
    return w / w.sum()


def simulate_choices(problem: ChoiceProblem, n_samples: int, rng: np.random.Generator) -> NDArray[np.float64]:
    """Empirical choice frequencies of ``argmax(V + eps)`` with Gumbel(0, gamma) noise.

    Noise for all alternatives comes sequentially from the single ``rng``
    stream (row-major: sample by sample).  Ties, which have probability zero,
    go to the lowest index.
    """
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    v = problem.utilities
    n_alt = v.size
    params = GumbelParams(0.0, problem.gamma)
    counts = np.zeros(n_alt, dtype=np.int64)
    remaining = int(n_samples)
    while remaining > 0:
        rows = min(remaining, _CHUNK)
        eps = sample_gumbel(rng, params, size=(rows, n_alt))
        winners = np.argmax(v + eps, axis=1)
        counts += np.bincount(winners, minlength=n_alt)
        remaining -= rows
    return counts / n_samples


def iia_ratio_check(
    full_probs: ArrayLike,
    subset_indices: Sequence[int],
    subset_probs: ArrayLike | None = None,
) -> float:
    """Largest relative violation of the ratio form of Luce's choice axiom.

    For every pair ``x, y`` in the subset ``S`` computes
    ``|(p_S(x)/p_S(y)) / (p_X(x)/p_X(y)) - 1|`` and returns the maximum.

    ``subset_probs`` are choice probabilities observed when only ``S`` is
    offered (ordered like ``subset_indices``).  When omitted they are obtained
    by renormalizing ``full_probs`` on ``S``, which satisfies IIA by
    construction and so measures only floating-point error.
    """
    p = np.asarray(full_probs, dtype=float)
    idx = np.asarray(list(subset_indices), dtype=int)
    if idx.size < 2:
        raise DomainError("subset must contain at least 2 alternatives")
    if len(set(idx.tolist())) != idx.size:
        raise DomainError("subset indices must be distinct")
    if idx.min() < 0 or idx.max() >= p.size:
        raise DomainError("subset index out of range")
    pf = p[idx]
    if np.any(pf <= 0):
        raise DomainError("IIA check needs strictly positive probabilities on the subset")
    if subset_probs is None:
        ps = pf / pf.sum()
    else:
        ps = np.asarray(subset_probs, dtype=float)
        if ps.shape != pf.shape:
            raise DomainError("subset_probs must align with subset_indices")
        if np.any(ps <= 0):
            raise DomainError("IIA check needs strictly positive subset probabilities")
    ratio_s = ps[:, None] / ps[None, :]
    ratio_x = pf[:, None] / pf[None, :]
    return float(np.max(np.abs(ratio_s / ratio_x - 1.0)))


def entropy(p: ArrayLike) -> float:
    """Shannon entropy (nats) of a probability vector."""
    q = np.asarray(p, dtype=float)
    q = q[q > 0]
    return float(-(q * np.log(q)).sum())


def total_variation(p: ArrayLike, q: ArrayLike) -> float:
    return 0.5 * float(np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float)).sum())

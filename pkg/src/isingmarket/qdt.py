"""Operational quantum decision theory for a finite set of prospects.

The probability of choosing prospect ``j`` is ``p_j = f_j + q_j``: a utility
factor ``f_j = U_j / sum(U)`` plus an attraction factor ``q_j``.  Attraction
factors sum to zero and, by the quarter law, have mean absolute value 1/4.
The chosen prospect is the one with the largest ``p``.

Attractiveness rankings are supplied by the caller.  The usual criteria are
more certain gain, more uncertain loss, higher activity under certainty and
lower activity under uncertainty or risk.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, NamedTuple, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import stats

from .errors import ConstraintViolation, DomainError

__all__ = [
    "ProspectSet",
    "ChoiceCounts",
    "Preference",
    "FrequencyComparison",
    "utility_factor",
    "default_attraction",
    "default_attraction_exact",
    "prospect_probabilities",
    "preferred_prospect",
    "preference_inequality",
    "frequency_compare",
    "quarter_law_gap",
    "prospects_from_json",
    "evaluate",
]

SUM_TOL = 1e-12
QUARTER = 0.25


def utility_factor(utilities: ArrayLike) -> NDArray[np.float64]:
    """Normalized utilities ``U_j / sum(U)``.

    Utilities must be non-negative with at least one positive entry: the
    normalization has no meaning for mixed signs, so losses must be mapped to
    non-negative utilities before calling.
    """
    u = np.asarray(utilities, dtype=float).ravel()
    if u.size < 2:
        raise DomainError("need at least 2 prospects")
    if not np.all(np.isfinite(u)):
        raise DomainError("utilities must be finite")
    if np.any(u < 0):
        raise DomainError(
            "negative utility: U_j / sum(U) is ambiguous for mixed signs; map utilities to >= 0 first"
        )
    total = u.sum()
    if total <= 0:
        raise DomainError("all utilities are zero: utility factors are undefined")
    return u / total


def _ranking_positions(ranking: Sequence[int], n: int | None = None) -> list[int]:
    r = [int(i) for i in ranking]
    n = len(r) if n is None else n
    if len(r) < 2:
        raise DomainError("need at least 2 prospects")
    if sorted(r) != list(range(n)):
        raise DomainError(f"ranking must be a permutation of 0..{n - 1}, got {list(ranking)}")
    return r


def default_attraction_exact(ranking: Sequence[int]) -> list[Fraction]:
    """Rational attraction factors, indexed by prospect.

    ``ranking[0]`` is the most attractive prospect.  Values are equally spaced,
    symmetric about 0, decreasing along the ranking, and scaled so that their
    mean absolute value is exactly 1/4.
    """
    r = _ranking_positions(ranking)
    n = len(r)
    steps = [n - 1 - 2 * pos for pos in range(n)]
    scale = Fraction(n, 4 * sum(abs(s) for s in steps))
    q: list[Fraction] = [Fraction(0)] * n
    for pos, prospect in enumerate(r):
        q[prospect] = steps[pos] * scale
    return q


def default_attraction(ranking: Sequence[int]) -> NDArray[np.float64]:
    """Float version of :func:`default_attraction_exact`."""
    return np.array([float(v) for v in default_attraction_exact(ranking)])


def quarter_law_gap(q: ArrayLike) -> float:
    """``mean|q| - 1/4``; informative only, never enforced."""
    return float(np.mean(np.abs(np.asarray(q, dtype=float))) - QUARTER)


def _check_q(q: NDArray[np.float64]) -> None:
    if not np.all(np.isfinite(q)):
        raise DomainError("attraction factors must be finite")
    if np.any(np.abs(q) > 1):
        raise ConstraintViolation("attraction factors must lie in [-1, 1]")
    if abs(q.sum()) > SUM_TOL:
        raise ConstraintViolation(f"attraction factors must sum to 0 (alternation), got sum {q.sum():.3g}")


def _check_f(f: NDArray[np.float64]) -> None:
    if not np.all(np.isfinite(f)) or np.any(f < 0) or np.any(f > 1):
        raise ConstraintViolation("utility factors must lie in [0, 1]")
    if abs(f.sum() - 1) > SUM_TOL:
        raise ConstraintViolation(f"utility factors must sum to 1, got {f.sum():.17g}")


def prospect_probabilities(f: ArrayLike, q: ArrayLike) -> NDArray[np.float64]:
    """``p = f + q``; raises :class:`ConstraintViolation` if any ``p_j`` leaves [0, 1]."""
    f = np.asarray(f, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if f.shape != q.shape:
        raise DomainError("f and q must have the same length")
    _check_f(f)
    _check_q(q)
    p = f + q
    bad = np.flatnonzero((p < 0) | (p > 1))
    if bad.size:
        parts = ", ".join(f"p[{j}] = f + q = {p[j]:.6g}" for j in bad)
        raise ConstraintViolation(f"prospect probability {parts} violates 0 <= p <= 1")
    return p


class Preference(NamedTuple):
    index: int
    tie: bool


def preferred_prospect(p: ArrayLike) -> Preference:
    """Index of the largest probability; ties go to the lowest index and set ``tie``."""
    p = np.asarray(p, dtype=float).ravel()
    if p.size < 1:
        raise DomainError("empty probability vector")
    best = int(np.argmax(p))
    tie = int(np.sum(p == p[best])) > 1
    return Preference(best, tie)


def preference_inequality(f1: float, f2: float, q1: float, q2: float) -> bool:
    """True when prospect 1 is preferable over prospect 2: ``f1 - f2 > q2 - q1``."""
    return f1 - f2 > q2 - q1


@dataclass(frozen=True)
class ProspectSet:
    labels: tuple[str, ...]
    utilities: NDArray[np.float64]
    f: NDArray[np.float64]
    q: NDArray[np.float64]
    q_source: str = "user"

    @classmethod
    def build(
        cls,
        labels: Sequence[str],
        utilities: ArrayLike,
        *,
        q: ArrayLike | None = None,
        ranking: Sequence[int | str] | None = None,
    ) -> "ProspectSet":
        """Validated prospect set; ``q`` is taken as given or built from ``ranking``."""
        labels = tuple(str(x) for x in labels)
        if len(set(labels)) != len(labels):
            raise DomainError("prospect labels must be unique")
        u = np.asarray(utilities, dtype=float).ravel()
        if u.size != len(labels):
            raise DomainError("labels and utilities differ in length")
        f = utility_factor(u)
        if (q is None) == (ranking is None):
            raise DomainError("give exactly one of q or ranking")
        if q is not None:
            qv = np.asarray(q, dtype=float).ravel()
            if qv.size != u.size:
                raise DomainError("q and utilities differ in length")
            source = "user"
        else:
            idx = []
            for x in ranking:
                if isinstance(x, str):
                    if x not in labels:
                        raise DomainError(f"ranking names unknown prospect {x!r}")
                    idx.append(labels.index(x))
                else:
                    idx.append(int(x))
            if len(idx) != u.size:
                raise DomainError("ranking must list every prospect")
            qv = default_attraction(idx)
            source = "DEFAULT"
        prospect_probabilities(f, qv)
        return cls(labels, u, f, qv, source)

    @property
    def p(self) -> NDArray[np.float64]:
        return self.f + self.q

    @property
    def n(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class ChoiceCounts:
    """Number of choices ``N_j`` per prospect out of ``total``."""

    counts: tuple[int, ...]

    def __init__(self, counts: Sequence[int]):
        c = tuple(int(x) for x in counts)
        if any(x < 0 for x in c) or any(int(x) != x for x in counts):
            raise DomainError("counts must be non-negative integers")
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def frequencies(self) -> NDArray[np.float64]:
        return np.array(self.counts, dtype=float) / self.total


@dataclass(frozen=True)
class FrequencyComparison:
    p_exp: NDArray[np.float64]
    chi_square: float
    dof: int
    p_value: float
    low_expectation: bool


def frequency_compare(p_theory: ArrayLike, counts: ChoiceCounts | Sequence[int]) -> FrequencyComparison:
    """Pearson chi-square of observed choice frequencies against ``p_theory``.

    Needs ``total >= 5 * n_prospects``.  Cells with expected count below 1 set
    ``low_expectation`` (and emit a warning) but the statistic is still returned.
    """
    if not isinstance(counts, ChoiceCounts):
        counts = ChoiceCounts(counts)
    p = np.asarray(p_theory, dtype=float).ravel()
    obs = np.array(counts.counts, dtype=float)
    if p.size != obs.size:
        raise DomainError("p_theory and counts differ in length")
    if abs(p.sum() - 1) > 1e-9 or np.any(p < 0):
        raise DomainError("p_theory must be a probability vector")
    total = counts.total
    if total < 5 * p.size:
        raise DomainError(f"need total >= 5 * {p.size} choices, got {total}")
    expected = total * p
    low = bool(np.any(expected < 1))
    if low:
        warnings.warn("some expected cell counts are below 1; chi-square approximation is poor", stacklevel=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(expected > 0, (obs - expected) ** 2 / expected, np.where(obs > 0, np.inf, 0.0))
    chi2 = float(terms.sum())
    dof = p.size - 1
    pval = float(stats.chi2.sf(chi2, dof)) if math.isfinite(chi2) else 0.0
    return FrequencyComparison(obs / total, chi2, dof, pval, low)


def prospects_from_json(doc: str | dict[str, Any]) -> ProspectSet:
    """Parse ``{"labels": [...], "utilities": [...], "q": [...] | "ranking": [...]}``."""
    d = json.loads(doc) if isinstance(doc, str) else dict(doc)
    allowed = {"labels", "utilities", "q", "ranking", "counts"}
    unknown = set(d) - allowed
    if unknown:
        raise DomainError(f"unknown prospect keys: {sorted(unknown)}")
    for key in ("labels", "utilities"):
        if key not in d:
            raise DomainError(f"missing prospect key {key!r}")
    return ProspectSet.build(d["labels"], d["utilities"], q=d.get("q"), ranking=d.get("ranking"))


def evaluate(prospects: ProspectSet, counts: Sequence[int] | None = None) -> dict[str, Any]:
    """JSON-ready result: ``f, q, p, preferred, tie`` plus provenance of ``q``."""
    p = prospect_probabilities(prospects.f, prospects.q)
    pref = preferred_prospect(p)
    out: dict[str, Any] = {
        "labels": list(prospects.labels),
        "f": [float(x) for x in prospects.f],
        "q": [float(x) for x in prospects.q],
        "p": [float(x) for x in p],
        "preferred": pref.index,
        "tie": pref.tie,
        "q_source": prospects.q_source,
        "quarter_law_gap": quarter_law_gap(prospects.q),
    }
    if counts is not None:
        cmp = frequency_compare(p, counts)
        out["frequency"] = {
            "p_exp": [float(x) for x in cmp.p_exp],
            # a choice observed for a zero-probability prospect gives an infinite statistic
            "chi_square": cmp.chi_square if math.isfinite(cmp.chi_square) else None,
            "dof": cmp.dof,
            "p_value": cmp.p_value,
            "low_expectation": cmp.low_expectation,
        }
    return out

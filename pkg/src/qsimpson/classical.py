"""Classical oracle: joint distributions over (gender, treatment, result).

Kept independent of the quantum engine (plain float arithmetic on a dict)
so that it can cross-check it; :func:`embed_commuting` is the only bridge.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

import numpy as np

from .engine import (
    GENDER_LABELS,
    RESULT_LABELS,
    SIX_RATES,
    TREATMENT_LABELS,
    ConvexityResiduals,
    MeasurementScenario,
    RateTable,
    TwoOutcomeMeasurement,
)
from .linalg import IDENTITY_TOL, Projector, StateVector

OUTCOMES = tuple(itertools.product(GENDER_LABELS, TREATMENT_LABELS, RESULT_LABELS))

# Conditioning events with probability below this give undefined rates.
CONDITIONING_TOL = 1e-15


@dataclass(frozen=True)
class ClassicalDistribution:
    probs: Mapping[tuple[str, str, str], float]

    def __post_init__(self):
        probs = {k: float(self.probs.get(k, 0.0)) for k in OUTCOMES}
        extra = set(self.probs) - set(OUTCOMES)
        if extra:
            raise ValueError(f"unknown outcome triples: {sorted(extra)}")
        if any(not math.isfinite(v) or v < 0.0 for v in probs.values()):
            raise ValueError("probabilities must be finite and nonnegative")
        if abs(sum(probs.values()) - 1.0) > IDENTITY_TOL:
            raise ValueError(f"probabilities sum to {sum(probs.values())!r}, not 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_weights(cls, weights) -> ClassicalDistribution:
        """Normalize 8 nonnegative weights given in ``OUTCOMES`` order."""
        w = [float(x) for x in weights]
        total = sum(w)
        return cls(dict(zip(OUTCOMES, (x / total for x in w))))

    @classmethod
    def uniform(cls) -> ClassicalDistribution:
        return cls.from_weights([1.0] * 8)

    @classmethod
    def point_mass(cls, outcome) -> ClassicalDistribution:
        return cls({tuple(outcome): 1.0})

    @classmethod
    def from_rates(cls, rates: Mapping, group_weights: Mapping) -> ClassicalDistribution:
        """Build from per-group survival rates and group sizes.

        Both mappings are keyed by ``(gender, treatment)``; ``group_weights`` is
        normalized internally.
        """
        total = sum(group_weights.values())
        probs = {}
        for (g, e), w in group_weights.items():
            r = rates[(g, e)]
            probs[(g, e, "A")] = w / total * r
            probs[(g, e, "D")] = w / total * (1.0 - r)
        return cls(probs)

    def marginal(self, **fixed: str) -> float:
        """Probability that the named coordinates (gender/treatment/result) take the given values."""
        idx = {"gender": 0, "treatment": 1, "result": 2}
        return sum(
            p for k, p in self.probs.items() if all(k[idx[n]] == v for n, v in fixed.items())
        )


def c3_distribution(female_share_treated: float = 0.5, female_share_control: float = 0.5) -> ClassicalDistribution:
    """Built-in classical example: 99% survival in both treated groups, 33% in both controls."""
    rates = {("F", "T"): 0.99, ("M", "T"): 0.99, ("F", "U"): 0.33, ("M", "U"): 0.33}
    weights = {
        ("F", "T"): female_share_treated,
        ("M", "T"): 1.0 - female_share_treated,
        ("F", "U"): female_share_control,
        ("M", "U"): 1.0 - female_share_control,
    }
    return ClassicalDistribution.from_rates(rates, weights)


def _weights_to_dist(w: np.ndarray) -> ClassicalDistribution:
    return ClassicalDistribution.from_weights(w.tolist())


def random_distribution(seed: int) -> ClassicalDistribution:
    """Eight independent unit-exponential draws, normalized (flat Dirichlet)."""
    rng = np.random.default_rng(seed)
    return _weights_to_dist(rng.standard_exponential(8))


def sample_distributions(seed: int, count: int):
    """Yield ``count`` distributions from one seeded stream; the first equals ``random_distribution(seed)``."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield _weights_to_dist(rng.standard_exponential(8))


def _cond(num: float, den: float) -> Optional[float]:
    return num / den if den >= CONDITIONING_TOL else None


def classical_rates(dist: ClassicalDistribution) -> RateTable:
    P = dist.probs

    def group(g, e):
        return P[(g, e, "A")] + P[(g, e, "D")]

    def arm(e):
        return group("F", e) + group("M", e)

    def arm_alive(e):
        return P[("F", e, "A")] + P[("M", e, "A")]

    return RateTable(
        r_t=_cond(arm_alive("T"), arm("T")),
        r_c=_cond(arm_alive("U"), arm("U")),
        rf_t=_cond(P[("F", "T", "A")], group("F", "T")),
        rm_t=_cond(P[("M", "T", "A")], group("M", "T")),
        rf_c=_cond(P[("F", "U", "A")], group("F", "U")),
        rm_c=_cond(P[("M", "U", "A")], group("M", "U")),
        frac_f_given_t=_cond(group("F", "T"), arm("T")),
        frac_m_given_t=_cond(group("M", "T"), arm("T")),
        frac_f_given_u=_cond(group("F", "U"), arm("U")),
        frac_m_given_u=_cond(group("M", "U"), arm("U")),
    )


def classical_S(dist: ClassicalDistribution) -> float:
    r = classical_rates(dist)
    r.require(*SIX_RATES)
    return (r.rf_t + r.rm_t - r.r_t) - (r.rf_c + r.rm_c - r.r_c)


def verify_convexity(dist: ClassicalDistribution) -> ConvexityResiduals:
    r = classical_rates(dist)
    r.require(*SIX_RATES, "frac_f_given_t", "frac_m_given_t", "frac_f_given_u", "frac_m_given_u")
    return ConvexityResiduals(
        r.r_t - (r.frac_f_given_t * r.rf_t + r.frac_m_given_t * r.rm_t),
        r.r_c - (r.frac_f_given_u * r.rf_c + r.frac_m_given_u * r.rm_c),
    )


def _diag_measurement(labels, axis: int) -> TwoOutcomeMeasurement:
    diag = [1.0 if k[axis] == labels[0] else 0.0 for k in OUTCOMES]
    return TwoOutcomeMeasurement.from_projector(labels, Projector(np.diag(diag)))


def embed_commuting(dist: ClassicalDistribution) -> MeasurementScenario:
    """Commuting dim-8 scenario reproducing ``dist``: amplitudes sqrt(prob) on the basis ``OUTCOMES``."""
    amps = np.array([math.sqrt(dist.probs[k]) for k in OUTCOMES], dtype=np.complex128)
    return MeasurementScenario(
        StateVector(amps),
        _diag_measurement(GENDER_LABELS, 0),
        _diag_measurement(TREATMENT_LABELS, 1),
        _diag_measurement(RESULT_LABELS, 2),
    )


def _exact_S(counts) -> Optional[Fraction]:
    P = dict(zip(OUTCOMES, counts))

    def rate(alive, total):
        return Fraction(alive, total) if total else None

    def grp(g, e):
        return P[(g, e, "A")], P[(g, e, "A")] + P[(g, e, "D")]

    vals = []
    for e in ("T", "U"):
        (fa, fn), (ma, mn) = grp("F", e), grp("M", e)
        vals += [rate(fa, fn), rate(ma, mn), rate(fa + ma, fn + mn)]
    if any(v is None for v in vals):
        return None
    rf_t, rm_t, r_t, rf_c, rm_c, r_c = vals
    return (rf_t + rm_t - r_t) - (rf_c + rm_c - r_c)


def extremal_grid_search(denominator: int = 8) -> tuple[Fraction, tuple[int, ...]]:
    """Exact max |S| over all distributions whose entries are multiples of 1/denominator.

    Returns the maximum and the count vector (in ``OUTCOMES`` order) attaining it.
    """
    best, arg = Fraction(-1), None
    # compositions of `denominator` into 8 nonnegative parts via stars and bars
    for bars in itertools.combinations(range(denominator + 7), 7):
        counts, prev = [], -1
        for b in bars:
            counts.append(b - prev - 1)
            prev = b
        counts.append(denominator + 7 - prev - 1)
        s = _exact_S(counts)
        if s is not None and abs(s) > best:
            best, arg = abs(s), tuple(counts)
    return best, arg

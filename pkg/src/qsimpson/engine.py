"""Sequential projective measurement engine.

A scenario is a state plus three two-outcome measurements, applied in the
fixed order Gender -> Treatment -> Result (or Treatment -> Result when
Gender is skipped). Probabilities are squared norms of the successively
projected state, divided by the squared norm of the initial state.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np

from .errors import DimensionMismatch, InvalidOutcomeLabel, UndefinedRate, ValidationError
from .linalg import (
    IDENTITY_TOL,
    VALIDATION_TOL,
    Projector,
    StateVector,
    commutator_norm,
    norm_sq,
    projector_from_span,
)

# Conditioning events with probability below this yield undefined rates.
CONDITIONING_TOL = 1e-15

GENDER_LABELS = ("F", "M")
TREATMENT_LABELS = ("T", "U")
RESULT_LABELS = ("A", "D")


@dataclass(frozen=True, eq=False)
class TwoOutcomeMeasurement:
    labels: tuple[str, str]
    first: Projector
    second: Projector

    def __post_init__(self):
        if len(self.labels) != 2 or self.labels[0] == self.labels[1]:
            raise ValidationError(f"need two distinct outcome labels, got {self.labels!r}")
        object.__setattr__(self, "labels", tuple(self.labels))
        if self.first.dim != self.second.dim:
            raise DimensionMismatch("projector dimensions differ")
        resid = self.complement_residual
        if resid > VALIDATION_TOL:
            raise ValidationError(
                f"projectors for {self.labels} are not complementary (residual {resid:.3g})"
            )

    @property
    def dim(self) -> int:
        return self.first.dim

    @property
    def complement_residual(self) -> float:
        total = self.first.matrix + self.second.matrix
        return float(np.max(np.abs(total - np.eye(self.dim))))

    @classmethod
    def from_projector(cls, labels, first: Projector) -> TwoOutcomeMeasurement:
        return cls(tuple(labels), first, first.complement())

    @classmethod
    def from_span(cls, labels, vectors) -> TwoOutcomeMeasurement:
        """Measurement whose first outcome projects onto span(vectors)."""
        return cls.from_projector(labels, projector_from_span(vectors))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidOutcomeLabel(f"{label!r} is not one of {self.labels}") from None

    def projector(self, label_or_index) -> Projector:
        i = label_or_index if isinstance(label_or_index, int) else self.index(label_or_index)
        return (self.first, self.second)[i]


@dataclass(frozen=True, eq=False)
class MeasurementScenario:
    state: StateVector
    gender: TwoOutcomeMeasurement
    treatment: TwoOutcomeMeasurement
    result: TwoOutcomeMeasurement

    def __post_init__(self):
        dims = {self.state.dim, self.gender.dim, self.treatment.dim, self.result.dim}
        if len(dims) != 1:
            raise DimensionMismatch(
                f"state dim {self.state.dim} vs measurement dims "
                f"{(self.gender.dim, self.treatment.dim, self.result.dim)}"
            )
        if norm_sq(self.state) <= 0.0:
            raise ValidationError("state has zero norm")

    @property
    def dim(self) -> int:
        return self.state.dim

    @property
    def measurements(self) -> tuple[TwoOutcomeMeasurement, ...]:
        return (self.gender, self.treatment, self.result)

    @cached_property
    def squared_lengths(self) -> dict:
        """Unnormalized squared norms keyed by index tuples.

        ``(g, e, r)`` -> ||R^r E^e G^g phi||^2 and ``(e, r)`` -> ||R^r E^e phi||^2,
        plus ``()`` -> ||phi||^2.
        """
        phi = self.state.amps
        out = {(): norm_sq(self.state)}
        pg = [p.matrix for p in (self.gender.first, self.gender.second)]
        pe = [p.matrix for p in (self.treatment.first, self.treatment.second)]
        pr = [p.matrix for p in (self.result.first, self.result.second)]

        def sq(v):
            return float(np.sum(v.real * v.real + v.imag * v.imag))

        for e in range(2):
            ev = pe[e] @ phi
            for r in range(2):
                out[(e, r)] = sq(pr[r] @ ev)
        for g in range(2):
            gv = pg[g] @ phi
            for e in range(2):
                ev = pe[e] @ gv
                for r in range(2):
                    out[(g, e, r)] = sq(pr[r] @ ev)
        return out


class RateTable(NamedTuple):
    """Conditional rates. ``None`` marks an undefined rate (zero-probability condition)."""

    r_t: Optional[float]
    r_c: Optional[float]
    rf_t: Optional[float]
    rm_t: Optional[float]
    rf_c: Optional[float]
    rm_c: Optional[float]
    frac_f_given_t: Optional[float]
    frac_m_given_t: Optional[float]
    frac_f_given_u: Optional[float]
    frac_m_given_u: Optional[float]

    @property
    def undefined(self) -> tuple[str, ...]:
        return tuple(k for k, v in self._asdict().items() if v is None)

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise UndefinedRate(missing)


SIX_RATES = ("r_t", "r_c", "rf_t", "rm_t", "rf_c", "rm_c")


@dataclass(frozen=True)
class SimpsonStats:
    d_t: float
    d_c: float
    s: float

    def __post_init__(self):
        for name in ("d_t", "d_c"):
            v = getattr(self, name)
            if not -1.0 - IDENTITY_TOL <= v <= 2.0 + IDENTITY_TOL:
                raise ValueError(f"{name}={v} outside [-1, 2]")


class ConvexityResiduals(NamedTuple):
    treated: float
    untreated: float


class ClassicalityReport(NamedTuple):
    gender_treatment: float
    gender_result: float
    treatment_result: float
    classical: bool


def _resolve(scenario: MeasurementScenario, outcomes) -> tuple[int, ...]:
    outcomes = tuple(outcomes)
    if len(outcomes) == 3:
        ms = scenario.measurements
    elif len(outcomes) == 2:
        ms = scenario.measurements[1:]
    else:
        raise InvalidOutcomeLabel(f"expected (g, e, r) or (e, r), got {outcomes!r}")
    return tuple(m.index(o) for m, o in zip(ms, outcomes))


def joint_probability(scenario: MeasurementScenario, outcomes) -> float:
    """Probability of an outcome tuple: ``(g, e, r)`` with Gender measured first, or ``(e, r)`` without."""
    key = _resolve(scenario, outcomes)
    lengths = scenario.squared_lengths
    return lengths[key] / lengths[()]


def _ratio(num: float, den: float, total: float) -> Optional[float]:
    if den / total < CONDITIONING_TOL:
        return None
    return num / den


def conditional_rates(scenario: MeasurementScenario) -> RateTable:
    L = scenario.squared_lengths
    total = L[()]
    T, U, A, D, F, M = 0, 1, 0, 1, 0, 1

    def edge_rate(e):
        return _ratio(L[(e, A)], L[(e, A)] + L[(e, D)], total)

    def vertex_rate(g, e):
        return _ratio(L[(g, e, A)], L[(g, e, A)] + L[(g, e, D)], total)

    def frac(g, e):
        ge = L[(g, e, A)] + L[(g, e, D)]
        other = L[(1 - g, e, A)] + L[(1 - g, e, D)]
        return _ratio(ge, ge + other, total)

    return RateTable(
        r_t=edge_rate(T),
        r_c=edge_rate(U),
        rf_t=vertex_rate(F, T),
        rm_t=vertex_rate(M, T),
        rf_c=vertex_rate(F, U),
        rm_c=vertex_rate(M, U),
        frac_f_given_t=frac(F, T),
        frac_m_given_t=frac(M, T),
        frac_f_given_u=frac(F, U),
        frac_m_given_u=frac(M, U),
    )


def simpson_statistics(rates: RateTable) -> SimpsonStats:
    """d_t = R^f_t + R^m_t - R_t, d_c likewise, S = d_t - d_c."""
    rates.require(*SIX_RATES)
    d_t = rates.rf_t + rates.rm_t - rates.r_t
    d_c = rates.rf_c + rates.rm_c - rates.r_c
    return SimpsonStats(d_t, d_c, d_t - d_c)


def convexity_residuals_from_rates(rates: RateTable) -> ConvexityResiduals:
    rates.require(*SIX_RATES, "frac_f_given_t", "frac_m_given_t", "frac_f_given_u", "frac_m_given_u")
    res_t = rates.r_t - (rates.frac_f_given_t * rates.rf_t + rates.frac_m_given_t * rates.rm_t)
    res_u = rates.r_c - (rates.frac_f_given_u * rates.rf_c + rates.frac_m_given_u * rates.rm_c)
    return ConvexityResiduals(res_t, res_u)


def convexity_residual(scenario: MeasurementScenario) -> ConvexityResiduals:
    """Combined rate minus the gender-weighted mix of subgroup rates, per arm.

    Zero for every classical (commuting) scenario.
    """
    return convexity_residuals_from_rates(conditional_rates(scenario))


def classicality_check(scenario: MeasurementScenario, tol: float = VALIDATION_TOL) -> ClassicalityReport:
    if tol <= 0:
        raise ValueError("tol must be positive")
    g, e, r = (m.first for m in scenario.measurements)
    ge, gr, er = commutator_norm(g, e), commutator_norm(g, r), commutator_norm(e, r)
    return ClassicalityReport(ge, gr, er, max(ge, gr, er) <= tol)


def rate_intervals_disjoint(rates: RateTable) -> bool:
    rates.require(*SIX_RATES)
    lo_t, hi_t = sorted((rates.rf_t, rates.rm_t))
    lo_c, hi_c = sorted((rates.rf_c, rates.rm_c))
    return lo_t > hi_c or lo_c > hi_t


def normalization_residuals(scenario: MeasurementScenario) -> tuple[float, float]:
    """Deviation from 1 of the total probability of each experiment."""
    L = scenario.squared_lengths
    total = L[()]
    three = sum(v for k, v in L.items() if len(k) == 3) / total
    two = sum(v for k, v in L.items() if len(k) == 2) / total
    return abs(three - 1.0), abs(two - 1.0)

"""The explicit two-parameter scenario family and its closed forms.

Hilbert space is V (x) W with V = span{t, u0, u1, u2} and W = span{a, d},
ordered (t, u0, u1, u2) (x) (a, d) with the W index varying fastest.
Result acts on W, Treatment and Gender act on V.

Notation: ``plus(x, y)`` is (x + y)/sqrt(2) and ``minus(x, y)`` is
(x - y)/sqrt(2); they nest, so ``plus(plus(u0, u1), t)`` is the unit vector
((u0 + u1)/sqrt(2) + t)/sqrt(2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .engine import (
    GENDER_LABELS,
    RESULT_LABELS,
    TREATMENT_LABELS,
    MeasurementScenario,
    RateTable,
    TwoOutcomeMeasurement,
)
from .errors import DegenerateParams, InvalidParams
from .linalg import StateVector, basis_vector

V_BASIS = ("t", "u0", "u1", "u2")
W_BASIS = ("a", "d")


@dataclass(frozen=True)
class FamilyParams:
    p: float
    q: float

    def __post_init__(self):
        for name in ("p", "q"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise InvalidParams(f"{name} must be a finite nonnegative real, got {v!r}")

    @property
    def degenerate(self) -> bool:
        return self.p == 0.0 and self.q == 0.0

    @classmethod
    def q1(cls, epsilon: float) -> FamilyParams:
        return cls(1.0, epsilon)

    @classmethod
    def q2(cls, epsilon: float) -> FamilyParams:
        return cls(epsilon, epsilon * epsilon)


@dataclass(frozen=True)
class CubeLengths:
    """Squared lengths of the projected (unnormalized) state.

    ``vertex[(g, e, r)]`` is ||R^r E^e G^g phi||^2 and ``edge[(e, r)]`` is
    ||R^r E^e phi||^2, keyed by outcome labels.
    """

    vertex: dict
    edge: dict
    total_norm_sq: float


def v_ket(name: str) -> StateVector:
    return basis_vector(4, V_BASIS.index(name))


def w_ket(name: str) -> StateVector:
    return basis_vector(2, W_BASIS.index(name))


def plus(x: StateVector, y: StateVector) -> StateVector:
    return (x + y) * (1.0 / math.sqrt(2.0))


def minus(x: StateVector, y: StateVector) -> StateVector:
    return (x - y) * (1.0 / math.sqrt(2.0))


def gender_vectors() -> dict[str, StateVector]:
    """f0, f1 (Female eigenspace) and m0, m1 (Male eigenspace) on V."""
    t, u0, u1, u2 = (v_ket(n) for n in V_BASIS)
    return {
        "f0": plus(plus(u0, u1), t),
        "f1": u2,
        "m0": minus(plus(u0, u1), t),
        "m1": minus(u0, u1),
    }


def family_state(params: FamilyParams) -> StateVector:
    """phi = phi_a (x) a + phi_d (x) d (unnormalized, squared norm 1 + p + q)."""
    t, u0, u1, u2 = (v_ket(n) for n in V_BASIS)
    phi_a = plus(u0, u1) * math.sqrt(params.p)
    phi_d = plus(minus(u0, u1), u2) + t * math.sqrt(params.q)
    return phi_a.tensor(w_ket("a")) + phi_d.tensor(w_ket("d"))


def family_measurements() -> tuple[TwoOutcomeMeasurement, TwoOutcomeMeasurement, TwoOutcomeMeasurement]:
    gv = gender_vectors()
    a, d = w_ket("a"), w_ket("d")
    gender = TwoOutcomeMeasurement.from_span(
        GENDER_LABELS, [gv[k].tensor(w) for k in ("f0", "f1") for w in (a, d)]
    )
    treatment = TwoOutcomeMeasurement.from_span(
        TREATMENT_LABELS, [v_ket("t").tensor(w) for w in (a, d)]
    )
    result = TwoOutcomeMeasurement.from_span(
        RESULT_LABELS, [v_ket(v).tensor(a) for v in V_BASIS]
    )
    return gender, treatment, result


def build_paper_scenario(params: FamilyParams) -> MeasurementScenario:
    # phi_d never vanishes, so even p = q = 0 gives a valid (if rate-degenerate) state.
    gender, treatment, result = family_measurements()
    return MeasurementScenario(family_state(params), gender, treatment, result)


def closed_form_rates(params: FamilyParams) -> RateTable:
    """Rates of the family by direct computation.

    P(D|T) = 1, P(A|U) = p/(1+p), P(A|TF) = P(A|TM) = p/(p+q) and
    P(D|UF) = P(D|UM) = (2+q)/(2+p+q). Gender splits each arm evenly.
    R_t is undefined when q = 0 since the Treated outcome then never occurs
    without a prior Gender measurement.
    """
    p, q = params.p, params.q
    if params.degenerate:
        raise DegenerateParams("p = q = 0 leaves P(A|TF) undefined")
    r_t = 0.0 if q > 0.0 else None  # 1 - P(D|T)
    r_c = p / (1.0 + p)
    r_tg = p / (p + q)
    r_cg = 1.0 - (2.0 + q) / (2.0 + p + q)
    return RateTable(
        r_t=r_t,
        r_c=r_c,
        rf_t=r_tg,
        rm_t=r_tg,
        rf_c=r_cg,
        rm_c=r_cg,
        frac_f_given_t=0.5,
        frac_m_given_t=0.5,
        frac_f_given_u=0.5,
        frac_m_given_u=0.5,
    )


def family_S(params: FamilyParams) -> float:
    """S(p, q) = 2p/(p+q) - 2p/(2+p+q) + p/(1+p)."""
    p, q = params.p, params.q
    if params.degenerate:
        raise DegenerateParams("S is undefined at p = q = 0")
    return 2.0 * p / (p + q) - 2.0 * p / (2.0 + p + q) + p / (1.0 + p)


def cube_annotations(scenario: MeasurementScenario) -> CubeLengths:
    L = scenario.squared_lengths
    g_lab, e_lab, r_lab = (m.labels for m in scenario.measurements)
    vertex = {
        (g_lab[g], e_lab[e], r_lab[r]): L[(g, e, r)]
        for g in range(2) for e in range(2) for r in range(2)
    }
    edge = {(e_lab[e], r_lab[r]): L[(e, r)] for e in range(2) for r in range(2)}
    return CubeLengths(vertex, edge, L[()])

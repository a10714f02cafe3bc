"""Quantities behind the |S| < 2 argument, evaluated on concrete scenarios.

Lengths are norms of the unit-normalized state after a sequence of
projections, e.g. ``dt`` is ||R^D E^T phi|| and ``atf`` is
||R^A E^T G^F phi||. The six ratios turn S + 3 into a sum of six terms
1/(1 + x^2), each a conditional rate or its complement::

    alpha   = l_AT / l_DT     1/(1+alpha^2)   = 1 - R_t
    alpha_f = l_DTF / l_ATF   1/(1+alpha_f^2) = R^f_t
    beta    = l_DU / l_AU     1/(1+beta^2)    = R_c
    beta_f  = l_AUF / l_DUF   1/(1+beta_f^2)  = 1 - R^f_c

(and likewise for M).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .engine import MeasurementScenario, conditional_rates, simpson_statistics

# Slack allowed on inequalities that hold exactly in exact arithmetic.
INEQUALITY_TOL = 1e-12
MASTER_TOL = 1e-10


class EllTable(NamedTuple):
    atf: float
    dtf: float
    atm: float
    dtm: float
    auf: float
    duf: float
    aum: float
    dum: float
    at: float
    dt: float
    au: float
    du: float


class RatioSet(NamedTuple):
    """Ratios of lengths; ``inf`` (and the flag False) where the denominator vanishes."""

    alpha: float
    alpha_f: float
    alpha_m: float
    beta: float
    beta_f: float
    beta_m: float
    defined: tuple[bool, bool, bool, bool, bool, bool]


@dataclass(frozen=True)
class IdentityReport:
    triangle_t: float
    triangle_u: float
    master_residual: float
    case: str  # "a", "u" or "boundary"
    eqn_a_margin: float
    eqn_u_margin: float
    branch_sum: float

    @property
    def triangle_ok(self) -> bool:
        return self.triangle_t >= -INEQUALITY_TOL and self.triangle_u >= -INEQUALITY_TOL

    @property
    def master_ok(self) -> bool:
        return abs(self.master_residual) <= MASTER_TOL

    @property
    def case_split_ok(self) -> bool:
        """When the T-side inequality fails, the U-side one holds (up to rounding)."""
        if self.case != "u":
            return True
        return self.eqn_u_margin > -INEQUALITY_TOL

    @property
    def branch_ok(self) -> bool:
        """In whichever case applies, the matching three-term sum is at most 2."""
        return self.case == "boundary" or self.branch_sum <= 2.0 + INEQUALITY_TOL

    @property
    def ok(self) -> bool:
        return self.triangle_ok and self.master_ok and self.case_split_ok and self.branch_ok


@dataclass(frozen=True)
class BoundVerdict:
    s: float
    s_prime: float
    margin: float

    @property
    def holds(self) -> bool:
        return self.margin > 0.0 and self.s_prime < 5.0


def ell_table(scenario: MeasurementScenario) -> EllTable:
    L = scenario.squared_lengths
    total = L[()]

    def ell(key):
        return math.sqrt(L[key] / total)

    F, M, T, U, A, D = 0, 1, 0, 1, 0, 1
    return EllTable(
        atf=ell((F, T, A)), dtf=ell((F, T, D)),
        atm=ell((M, T, A)), dtm=ell((M, T, D)),
        auf=ell((F, U, A)), duf=ell((F, U, D)),
        aum=ell((M, U, A)), dum=ell((M, U, D)),
        at=ell((T, A)), dt=ell((T, D)),
        au=ell((U, A)), du=ell((U, D)),
    )


def _ratio(num: float, den: float) -> tuple[float, bool]:
    if den == 0.0:
        return math.inf, False
    return num / den, True


def _term(x: float) -> float:
    return 0.0 if math.isinf(x) else 1.0 / (1.0 + x * x)


def ratios_and_s_prime(ells: EllTable) -> tuple[RatioSet, float]:
    pairs = [
        (ells.at, ells.dt),
        (ells.dtf, ells.atf),
        (ells.dtm, ells.atm),
        (ells.du, ells.au),
        (ells.auf, ells.duf),
        (ells.aum, ells.dum),
    ]
    vals, flags = zip(*(_ratio(n, d) for n, d in pairs))
    ratios = RatioSet(*vals, defined=tuple(flags))
    return ratios, sum(_term(x) for x in vals)


def verify_identities(scenario: MeasurementScenario) -> IdentityReport:
    l = ell_table(scenario)
    r, _ = ratios_and_s_prime(l)
    triangle_t = l.dtf + l.dtm - l.dt
    triangle_u = l.auf + l.aum - l.au

    # ||E^T phi||^2, ||E^U phi||^2 and the same after a Gender measurement.
    t_direct = l.at ** 2 + l.dt ** 2
    u_direct = l.au ** 2 + l.du ** 2
    t_split = l.atf ** 2 + l.dtf ** 2 + l.atm ** 2 + l.dtm ** 2
    u_split = l.auf ** 2 + l.duf ** 2 + l.aum ** 2 + l.dum ** 2
    if all(r.defined):
        lhs = (1 + r.alpha ** 2) * l.dt ** 2 + (1 + r.beta ** 2) * l.au ** 2
        rhs = (
            (1 + r.alpha_f ** 2) * l.atf ** 2
            + (1 + r.alpha_m ** 2) * l.atm ** 2
            + (1 + r.beta_f ** 2) * l.duf ** 2
            + (1 + r.beta_m ** 2) * l.dum ** 2
        )
    else:
        lhs, rhs = t_direct + u_direct, t_split + u_split
    master = lhs - rhs

    if l.dt == 0.0 or l.au == 0.0:
        return IdentityReport(triangle_t, triangle_u, master, "boundary", math.nan, math.nan, math.nan)

    # (1 + alpha^2) - sum_g (1 + alpha_g^2) l_ATg^2 / l_DT^2 equals (t_direct - t_split) / l_DT^2;
    # the unscaled differences sum to zero, so when one is negative the other is positive.
    diff_t, diff_u = t_direct - t_split, u_direct - u_split
    a_margin = diff_t / l.dt ** 2
    u_margin = diff_u / l.au ** 2
    if diff_t >= 0.0:
        case = "a"
        branch = _term(r.alpha) + _term(r.alpha_f) + _term(r.alpha_m)
    else:
        case = "u"
        branch = _term(r.beta) + _term(r.beta_f) + _term(r.beta_m)
    return IdentityReport(triangle_t, triangle_u, master, case, a_margin, u_margin, branch)


def check_bound(scenario: MeasurementScenario) -> BoundVerdict:
    """S, S' = S + 3 (from the ratio form) and the margin 2 - |S|.

    Raises UndefinedRate when any of the six rates is undefined.
    """
    stats = simpson_statistics(conditional_rates(scenario))
    _, s_prime = ratios_and_s_prime(ell_table(scenario))
    return BoundVerdict(stats.s, s_prime, 2.0 - abs(stats.s))

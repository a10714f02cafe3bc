from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsimpson.classical import (
    OUTCOMES,
    ClassicalDistribution,
    c3_distribution,
    classical_rates,
    classical_S,
    embed_commuting,
    extremal_grid_search,
    random_distribution,
    sample_distributions,
    verify_convexity,
)
from qsimpson.engine import classicality_check, conditional_rates, rate_intervals_disjoint

weights = st.lists(st.floats(0.0, 1.0), min_size=8, max_size=8).filter(lambda w: sum(w) > 1e-3)


def test_validation():
    with pytest.raises(ValueError):
        ClassicalDistribution({("F", "T", "A"): 0.5})
    with pytest.raises(ValueError):
        ClassicalDistribution({("X", "T", "A"): 1.0})
    with pytest.raises(ValueError):
        ClassicalDistribution.from_weights([-1, 2, 0, 0, 0, 0, 0, 0])


def test_point_mass_rates_mostly_undefined():
    r = classical_rates(ClassicalDistribution.point_mass(("F", "T", "A")))
    assert r.rf_t == 1.0 and r.r_t == 1.0
    assert r.rm_t is None and r.r_c is None


def test_c3_rates():
    r = classical_rates(c3_distribution())
    assert r.rf_t == pytest.approx(0.99) and r.rm_c == pytest.approx(0.33)
    assert rate_intervals_disjoint(r)
    assert classical_S(c3_distribution()) == pytest.approx(0.99 - 0.33, abs=1e-12)


def test_seeded_sampling_is_deterministic():
    a = [d.probs for d in sample_distributions(11, 5)]
    b = [d.probs for d in sample_distributions(11, 5)]
    assert a == b
    assert a[0] == random_distribution(11).probs


def test_exact_grid_maximum_is_one():
    best, counts = extremal_grid_search(8)
    assert best == Fraction(1)
    assert sum(counts) == 8


def test_marginal():
    d = ClassicalDistribution.uniform()
    assert d.marginal(treatment="T") == pytest.approx(0.5)
    assert d.marginal(gender="F", result="D") == pytest.approx(0.25)


@settings(max_examples=200, deadline=None)
@given(weights)
def test_classical_bound_and_convexity(w):
    d = ClassicalDistribution.from_weights(w)
    r = classical_rates(d)
    if r.undefined:
        return
    assert abs(classical_S(d)) <= 1 + 1e-12
    res_t, res_u = verify_convexity(d)
    assert abs(res_t) <= 1e-12 and abs(res_u) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(weights)
def test_embedding_matches_oracle(w):
    d = ClassicalDistribution.from_weights(w)
    sc = embed_commuting(d)
    assert classicality_check(sc).classical
    for a, b in zip(conditional_rates(sc), classical_rates(d)):
        assert (a is None) == (b is None)
        if a is not None:
            assert abs(a - b) <= 1e-12


def test_outcome_order():
    assert OUTCOMES[0] == ("F", "T", "A") and OUTCOMES[-1] == ("M", "U", "D")
    assert len(set(OUTCOMES)) == 8
    assert np.isclose(sum(ClassicalDistribution.uniform().probs.values()), 1.0)

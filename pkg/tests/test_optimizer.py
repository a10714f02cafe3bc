import numpy as np
import pytest

from qsimpson.construction import FamilyParams, family_S
from qsimpson.errors import InvalidEpsilon, InvariantViolation
from qsimpson.optimizer import (
    OptimizationReport,
    ScenarioParameterization,
    default_ranks,
    optimize_family,
    optimize_general,
    sweep_family,
)


def test_sweep_examples():
    rows = sweep_family([0.1, 0.01, 0.001], "q2")
    assert [round(r.s, 3) for r in rows] == [1.814, 1.980, 1.998]
    assert rows[0].reference == pytest.approx(1.8) and rows[0].margin == pytest.approx(2 - rows[0].s)
    assert sweep_family([1 / 99], "q1")[0].s == pytest.approx(1.8156, abs=1e-4)
    assert sweep_family([1.0], "q2")[0].s == pytest.approx(family_S(FamilyParams(1, 1)), abs=1e-12)


@pytest.mark.parametrize("eps", [0.0, -0.1, 1.5, float("nan")])
def test_sweep_rejects_bad_epsilon(eps):
    with pytest.raises(InvalidEpsilon):
        sweep_family([eps])


def test_family_optimum_on_curve():
    for floor in (1e-2, 1e-3, 1e-4):
        rep = optimize_family(floor=floor)
        assert rep.best_s >= 2 - 2 * floor - 5 * floor**2
        assert rep.best_s < 2
        assert rep.best_params.p == pytest.approx(floor)


def test_unconstrained_grid_prefers_q_below_p():
    rep = optimize_family(floor=1e-6, curve=None, grid=100)
    assert rep.best_params.q < rep.best_params.p


def test_floor_half_hits_box_boundary():
    rep = optimize_family(floor=0.5, curve=None, grid=20)
    p, q = rep.best_params.p, rep.best_params.q
    assert p == 1.0 and q == pytest.approx(0.5)
    assert rep.best_s == family_S(FamilyParams(p, q))


def test_descent_refines_grid():
    coarse = optimize_family(floor=1e-3, curve=None, grid=5)
    fine = optimize_family(floor=1e-3, curve=None, grid=5, method="descent")
    assert fine.best_s >= coarse.best_s
    assert fine.evaluations > coarse.evaluations


def test_parameterization_roundtrip_and_validation():
    rng = np.random.default_rng(0)
    p = ScenarioParameterization.random(4, (2, 1, 2), rng)
    q = ScenarioParameterization.from_vector(4, (2, 1, 2), p.vector)
    assert np.array_equal(p.vector, q.vector)
    sc = p.decode()
    assert sc.dim == 4 and sc.gender.first.rank == 2 and sc.treatment.first.rank == 1
    with pytest.raises(ValueError):
        ScenarioParameterization.from_vector(4, (2, 1, 2), np.zeros(5))
    with pytest.raises(ValueError):
        ScenarioParameterization.from_vector(17, (1, 1, 1), np.zeros(10))
    with pytest.raises(ValueError):
        ScenarioParameterization.from_vector(2, (1, 1, 1), [np.inf] * 8)


def test_default_ranks():
    assert default_ranks(8) == (4, 1, 4)
    assert default_ranks(2) == (1, 1, 1)


def test_general_is_deterministic_and_worker_independent():
    kw = dict(dim=4, seed=3, restarts=4, iters=150)
    a = optimize_general(**kw)
    b = optimize_general(**kw, workers=3)
    assert a.best_s == b.best_s and a.trace == b.trace
    assert np.array_equal(a.best_params.vector, b.best_params.vector)
    assert len(a.trace) == 4 and a.trace[-1][0] == a.evaluations
    assert [t[1] for t in a.trace] == sorted(t[1] for t in a.trace)


def test_python_backend_gives_same_report():
    kw = dict(dim=3, ranks=(1, 1, 1), seed=9, restarts=2, iters=60)
    assert optimize_general(**kw, backend="python").trace == optimize_general(**kw).trace


def test_check_all_validates_every_point():
    rep = optimize_general(dim=2, seed=1, restarts=2, iters=40, check="all")
    assert rep.config["check"] == "all" and rep.best_s < 2


def test_qubit_below_dim_eight():
    small = optimize_general(dim=2, seed=4, restarts=8, iters=400)
    big = optimize_general(dim=8, ranks=(4, 1, 4), seed=4, restarts=8, iters=400)
    assert small.best_s < big.best_s


def test_report_refuses_s_two():
    with pytest.raises(InvariantViolation):
        OptimizationReport(best_s=2.0, best_params=None, evaluations=1, seed=0)

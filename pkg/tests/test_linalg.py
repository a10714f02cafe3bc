import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsimpson.errors import DimensionMismatch, NotAProjector, RankDeficient
from qsimpson.linalg import (
    Projector,
    StateVector,
    apply,
    basis_vector,
    commutator_norm,
    norm_sq,
    orthonormalize,
    projector_from_span,
    range_basis,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def spanning_sets(draw, max_dim=6):
    dim = draw(st.integers(2, max_dim))
    k = draw(st.integers(1, dim))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    vecs = rng.normal(size=(k, dim)) + 1j * rng.normal(size=(k, dim))
    return [StateVector(v) for v in vecs]


def test_state_is_immutable():
    v = StateVector([1, 2j])
    with pytest.raises(ValueError):
        v.amps[0] = 3


def test_state_arithmetic_and_tensor():
    a, b = basis_vector(2, 0), basis_vector(2, 1)
    assert np.allclose((a + b).amps, [1, 1])
    assert np.allclose((a - b).amps, [1, -1])
    assert np.allclose((2j * a).amps, [2j, 0])
    t = a.tensor(b)
    assert t.dim == 4 and np.allclose(t.amps, [0, 1, 0, 0])


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        basis_vector(2, 0) + basis_vector(3, 0)
    with pytest.raises(DimensionMismatch):
        apply(Projector.identity(3), basis_vector(2, 0))


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        StateVector([np.nan, 1])


@pytest.mark.parametrize(
    "m",
    [
        [[1, 1], [0, 0]],          # idempotent but not Hermitian
        [[0.5, 0], [0, 0]],        # Hermitian but not idempotent
        [[1, 0, 0], [0, 1, 0]],    # not square
    ],
)
def test_not_a_projector(m):
    with pytest.raises((NotAProjector, DimensionMismatch)):
        Projector(np.array(m, dtype=complex))


def test_identity_zero_complement():
    i3 = Projector.identity(3)
    assert i3.rank == 3
    assert Projector.zero(3).rank == 0
    assert np.allclose(i3.complement().matrix, 0)


def test_span_of_dependent_vectors_is_rank_deficient():
    with pytest.raises(RankDeficient):
        projector_from_span([StateVector([1, 1]), StateVector([2, 2])])
    with pytest.raises(RankDeficient):
        projector_from_span([StateVector([0, 0])])
    with pytest.raises(RankDeficient):
        projector_from_span([])


def test_commutator_of_diagonals_vanishes():
    p = Projector(np.diag([1, 0, 1]).astype(complex))
    q = Projector(np.diag([0, 0, 1]).astype(complex))
    assert commutator_norm(p, q) == 0.0
    h = projector_from_span([StateVector([1, 1, 0])])
    assert commutator_norm(p, h) > 0.1


@settings(max_examples=60, deadline=None)
@given(spanning_sets())
def test_orthonormalize_gives_orthonormal_basis(vectors):
    basis = orthonormalize([v.amps for v in vectors])
    gram = np.array([[np.vdot(a, b) for b in basis] for a in basis])
    assert np.max(np.abs(gram - np.eye(len(basis)))) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(spanning_sets())
def test_projector_from_span_properties(vectors):
    p = projector_from_span(vectors)
    m = p.matrix
    assert p.rank == len(vectors)
    assert np.max(np.abs(m @ m - m)) <= 1e-10
    assert np.max(np.abs(m - m.conj().T)) <= 1e-10
    for v in vectors:  # spanning vectors are fixed points
        assert np.max(np.abs(apply(p, v).amps - v.amps)) <= 1e-9 * max(1.0, np.linalg.norm(v.amps))
    assert np.max(np.abs(p.matrix + p.complement().matrix - np.eye(p.dim))) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(spanning_sets())
def test_range_basis_recovers_projector(vectors):
    p = projector_from_span(vectors)
    assert np.max(np.abs(projector_from_span(range_basis(p)).matrix - p.matrix)) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(spanning_sets(), st.integers(0, 2**32 - 1))
def test_pythagoras(vectors, seed):
    p = projector_from_span(vectors)
    rng = np.random.default_rng(seed)
    v = StateVector(rng.normal(size=p.dim) + 1j * rng.normal(size=p.dim))
    total = norm_sq(apply(p, v)) + norm_sq(apply(p.complement(), v))
    assert abs(total - norm_sq(v)) <= 1e-12 * max(1.0, norm_sq(v))

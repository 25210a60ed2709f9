# --------------------------------------

# Subspaces are stored as orthonormal bases, everything else (projectors, equality, order)
# is derived from them. These tests pin the lattice operations on small spaces where the
# answer can be written down by hand, and then on random subspaces with hypothesis.

# --------------------------------------

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from toeplitz_lattice.sampling import random_subspace
from toeplitz_lattice.subspace import (
    EQUALITY_TOL,
    AmbientMismatch,
    DimensionMismatch,
    EmptyAmbient,
    HilbertSpace,
    InvalidSubspace,
    Operator,
    Subspace,
    join,
    leq,
    meet,
    ortho,
    orthonormalize,
)

C3 = HilbertSpace(3)
E = np.eye(3)


def test_hilbert_space_needs_positive_dimension():
    with pytest.raises(EmptyAmbient):
        HilbertSpace(0)


def test_span_drops_dependent_vectors():
    space = Subspace.span([E[0], 2 * E[0], E[0] + E[1]], C3)
    assert space.dim == 2
    assert_allclose(space.basis.conj().T @ space.basis, np.eye(2), atol=1e-12)


def test_empty_span_needs_ambient():
    with pytest.raises(EmptyAmbient):
        orthonormalize([])
    assert orthonormalize([], C3).dim == 0


def test_span_rejects_wrong_dimension():
    with pytest.raises(DimensionMismatch):
        Subspace.span([E[0], np.ones(2)], C3)


def test_non_orthonormal_basis_is_rejected():
    with pytest.raises(InvalidSubspace):
        Subspace(C3, np.array([[1.0], [1.0], [0.0]]))


def test_projector_is_idempotent_and_read_only():
    plane = Subspace.span([E[0] + 1j * E[1], E[2]], C3)
    p = plane.projector
    assert_allclose(p @ p, p, atol=1e-12)
    assert_allclose(p, p.conj().T, atol=1e-12)
    with pytest.raises(ValueError):
        p[0, 0] = 0


def test_meet_and_join_of_planes():
    xy = Subspace.span([E[0], E[1]], C3)
    yz = Subspace.span([E[1], E[2]], C3)
    assert meet(xy, yz).equals(Subspace.span([E[1]], C3))
    assert join(xy, yz).equals(Subspace.full(C3))


def test_meet_with_bottom_and_top():
    line = Subspace.span([E[0] + E[2]], C3)
    assert meet(line, Subspace.zero(C3)).dim == 0
    assert meet(line, Subspace.full(C3)).equals(line)
    assert join(line, Subspace.zero(C3)).equals(line)


def test_ortho_is_an_involution():
    line = Subspace.span([E[0] + 1j * E[1]], C3)
    complement = ortho(line)
    assert complement.dim == 2
    assert ortho(complement).equals(line)
    assert ortho(Subspace.zero(C3)).equals(Subspace.full(C3))
    assert ortho(Subspace.full(C3)).dim == 0


def test_leq_and_contains():
    line = Subspace.span([E[0]], C3)
    plane = Subspace.span([E[0], E[1]], C3)
    assert leq(line, plane)
    assert not leq(plane, line)
    assert plane.contains(E[0] - 3 * E[1])
    assert not plane.contains(E[2])
    assert plane.contains(np.zeros(3))


def test_operations_refuse_different_ambients():
    with pytest.raises(AmbientMismatch):
        meet(Subspace.full(C3), Subspace.full(HilbertSpace(2)))


def test_subspace_survives_json():
    plane = Subspace.span([E[0] + 1j * E[1], E[2]], C3)
    restored = Subspace.from_json(plane.to_json())
    assert restored.equals(plane)
    assert Subspace.from_json(Subspace.zero(C3).to_json()).dim == 0


def test_operator_is_read_only_and_reports_hermiticity():
    op = Operator(HilbertSpace(2), [[1, 1j], [0, 2]])
    assert op.hermitian_defect() == pytest.approx(1.0)
    assert op.adjoint().matrix[1, 0] == pytest.approx(-1j)
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 5
    with pytest.raises(DimensionMismatch):
        Operator(HilbertSpace(3), np.eye(2))


@settings(max_examples=40, deadline=None)
@given(
    dim=st.integers(min_value=1, max_value=6),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_random_lattice_identities(dim: int, seed: int):
    rng = np.random.default_rng(seed)
    a = random_subspace(dim, int(rng.integers(0, dim + 1)), rng)
    b = random_subspace(dim, int(rng.integers(0, dim + 1)), rng, a.ambient)

    assert leq(meet(a, b), a) and leq(meet(a, b), b)
    assert leq(a, join(a, b)) and leq(b, join(a, b))
    # de Morgan
    assert ortho(join(a, b)).distance(meet(ortho(a), ortho(b))) <= 10 * EQUALITY_TOL
    assert meet(a, ortho(a)).dim == 0
    assert join(a, ortho(a)).dim == dim


@pytest.mark.parametrize("angle", [1e-6, 1e-5, 3e-5, 1e-4, 1e-2])
def test_meet_of_nearly_equal_planes_stays_below_both(angle: float):
    a = Subspace.span([E[0], E[1]], C3)
    b = Subspace.span([E[0], np.cos(angle) * E[1] + np.sin(angle) * E[2]], C3)
    m = meet(a, b)
    assert m.dim == 1
    assert m.equals(Subspace.span([E[0]], C3))
    assert leq(m, a) and leq(m, b)


def test_meet_of_planes_closer_than_the_tolerance_is_the_plane():
    a = Subspace.span([E[0], E[1]], C3)
    b = Subspace.span([E[0], np.cos(1e-10) * E[1] + np.sin(1e-10) * E[2]], C3)
    assert meet(a, b).dim == 2
    assert leq(meet(a, b), a) and leq(meet(a, b), b)


@settings(max_examples=40, deadline=None)
@given(
    dim=st.integers(min_value=1, max_value=6),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_leq_is_a_partial_order(dim: int, seed: int):
    rng = np.random.default_rng(seed)
    c = random_subspace(dim, int(rng.integers(0, dim + 1)), rng)
    b = meet(c, random_subspace(dim, int(rng.integers(0, dim + 1)), rng, c.ambient))
    a = meet(b, random_subspace(dim, int(rng.integers(0, dim + 1)), rng, c.ambient))

    assert leq(a, a)
    assert leq(a, b) and leq(b, c)
    # transitivity
    assert leq(a, c)
    # antisymmetry
    assert leq(b, join(b, a)) and leq(join(b, a), b)
    assert join(b, a).equals(b)
    if not b.equals(c):
        assert not leq(c, b)

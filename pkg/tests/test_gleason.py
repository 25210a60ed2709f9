import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from toeplitz_lattice.gleason import (
    DensityOperator,
    GleasonDimensionWarning,
    InvalidDensityOperator,
    NonOrthogonalParts,
    NotHermitian,
    check_additivity,
    expectation,
    gleason_probability,
    probability_report,
    probability_table,
    spectral_decompose,
    trace,
)
from toeplitz_lattice.quantization.toeplitz import height, toeplitz
from toeplitz_lattice.sampling import random_nested_pair, random_resolution, random_unitary
from toeplitz_lattice.subspace import HilbertSpace, Operator, Subspace, ortho

C3 = HilbertSpace(3)


def test_density_operator_validation():
    with pytest.raises(InvalidDensityOperator):
        DensityOperator(C3, np.diag([1.0, 0.5, -0.5]))
    with pytest.raises(InvalidDensityOperator):
        DensityOperator(C3, np.eye(3))
    with pytest.raises(InvalidDensityOperator):
        DensityOperator(HilbertSpace(2), [[0.5, 0.1j], [0.1j, 0.5]])


def test_pure_state_probabilities():
    psi = np.array([1.0, 1j, 0.0])
    rho = DensityOperator.pure(psi)
    assert rho.purity() == pytest.approx(1.0)
    line = Subspace.span([psi], C3)
    assert gleason_probability(rho, line) == pytest.approx(1.0)
    assert gleason_probability(rho, Subspace.span([[0, 0, 1]], C3)) == pytest.approx(0.0)
    assert gleason_probability(rho, Subspace.zero(C3)) == 0.0


def test_from_projector_is_uniform_on_the_subspace():
    plane = Subspace.span([[1, 0, 0], [0, 1, 1]], C3)
    rho = DensityOperator.from_projector(plane)
    assert rho.purity() == pytest.approx(0.5)
    assert gleason_probability(rho, plane) == pytest.approx(1.0)
    with pytest.raises(InvalidDensityOperator):
        DensityOperator.from_projector(Subspace.zero(C3))


def test_small_dimension_warns():
    c2 = HilbertSpace(2)
    rho = DensityOperator.maximally_mixed(c2)
    with pytest.warns(GleasonDimensionWarning):
        value = gleason_probability(rho, Subspace.span([[1, 0]], c2))
    assert value == pytest.approx(0.5)


def test_dimension_three_is_silent():
    rho = DensityOperator.maximally_mixed(C3)
    with warnings.catch_warnings():
        warnings.simplefilter("error", GleasonDimensionWarning)
        gleason_probability(rho, Subspace.full(C3))


def test_clamping_is_reported():
    rho = DensityOperator(C3, np.diag([1.0 + 5e-11, -5e-11, 0.0]))
    report = probability_report(rho, Subspace.span([[1, 0, 0]], C3), "x")
    assert report.clamped
    assert report.value == 1.0
    assert report.raw > 1.0
    assert probability_table([report]).splitlines()[0] == "component,dimension,raw,probability,clamped"


def test_expectation_matches_trace():
    rho = DensityOperator.random(C3, np.random.default_rng(0))
    a = Operator(C3, np.diag([1.0, 2.0, 3.0]))
    assert expectation(rho, a) == pytest.approx(np.trace(rho.matrix @ a.matrix))


def test_additivity_rejects_overlapping_parts():
    rho = DensityOperator.maximally_mixed(C3)
    with pytest.raises(NonOrthogonalParts):
        check_additivity(rho, [Subspace.span([[1, 0, 0]], C3), Subspace.span([[1, 1, 0]], C3)])


@settings(max_examples=50, deadline=None)
@given(
    dim=st.integers(min_value=3, max_value=16),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_additivity_for_random_states(dim: int, seed: int):
    rng = np.random.default_rng(seed)
    ambient = HilbertSpace(dim)
    rho = DensityOperator.random(ambient, rng)
    report = check_additivity(rho, random_resolution(dim, rng, ambient=ambient))
    assert report.resolves_identity
    assert report.holds
    assert report.total == pytest.approx(1.0, abs=1e-9)


def test_spectral_decompose_reconstructs():
    rng = np.random.default_rng(5)
    ambient = HilbertSpace(4)
    rho = DensityOperator.random(ambient, rng, rank=2)
    resolution = spectral_decompose(rho)
    assert sum(resolution.multiplicities) == 4
    assert resolution.reconstruction_error(rho) < 1e-12
    # rank 2: the zero eigenvalue has multiplicity 2
    assert resolution.multiplicities[0] == 2
    assert_allclose(resolution.eigenvalues[0], 0.0, atol=1e-12)


def test_spectral_decompose_needs_hermitian():
    with pytest.raises(NotHermitian):
        spectral_decompose(Operator(HilbertSpace(2), [[0, 1], [0, 0]]))


def test_close_eigenvalues_do_not_chain():
    # adjacent gaps are all below the merge gap, the full spread is not
    a = Operator(HilbertSpace(4), np.diag([0.0, 6e-9, 1.2e-8, 1.8e-8]))
    resolution = spectral_decompose(a)
    assert resolution.multiplicities == (2, 2)


def test_spectral_decompose_of_the_quantized_height():
    resolution = spectral_decompose(toeplitz(height(), 2))
    assert_allclose(resolution.eigenvalues, [-0.5, 0.0, 0.5], atol=1e-12)
    assert resolution.multiplicities == (1, 1, 1)
    rho = DensityOperator.maximally_mixed(resolution.ambient)
    report = check_additivity(rho, resolution.projectors)
    assert report.resolves_identity and report.holds


@settings(max_examples=30, deadline=None)
@given(
    dim=st.integers(min_value=1, max_value=64),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_spectral_reconstruction_of_random_hermitian(dim: int, seed: int):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    a = Operator(HilbertSpace(dim), (g + g.conj().T) / 2)
    resolution = spectral_decompose(a)
    scale = float(np.max(np.abs(np.linalg.eigvalsh(a.matrix)))) + 1
    assert sum(resolution.multiplicities) == dim
    assert resolution.reconstruction_error(a) <= 1e-8 * scale
    assert list(resolution.eigenvalues) == sorted(resolution.eigenvalues)


@settings(max_examples=30, deadline=None)
@given(
    dim=st.integers(min_value=3, max_value=16),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_additivity_over_eigenspaces(dim: int, seed: int):
    rng = np.random.default_rng(seed)
    ambient = HilbertSpace(dim)
    rho = DensityOperator.random(ambient, rng)
    observable = DensityOperator.random(ambient, rng, rank=max(1, dim // 2))
    report = check_additivity(rho, spectral_decompose(observable).projectors)
    assert report.resolves_identity
    assert report.holds


@settings(max_examples=40, deadline=None)
@given(
    dim=st.integers(min_value=1, max_value=8),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_trace_is_basis_independent(dim: int, seed: int):
    rng = np.random.default_rng(seed)
    ambient = HilbertSpace(dim)
    a = Operator(ambient, rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    u = random_unitary(dim, rng)
    rotated = Operator(ambient, u.conj().T @ a.matrix @ u)
    assert trace(rotated) == pytest.approx(trace(a), abs=1e-10 * dim)


@settings(max_examples=40, deadline=None)
@given(
    dim=st.integers(min_value=3, max_value=10),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_probability_is_monotone_and_complementary(dim: int, seed: int):
    rng = np.random.default_rng(seed)
    ambient = HilbertSpace(dim)
    rho = DensityOperator.random(ambient, rng)
    x, z = random_nested_pair(dim, rng, ambient)
    assert gleason_probability(rho, z) <= gleason_probability(rho, x) + 1e-12
    assert gleason_probability(rho, x) + gleason_probability(rho, ortho(x)) == pytest.approx(1.0, abs=1e-10)

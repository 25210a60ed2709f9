import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from rich import print

from toeplitz_lattice.lattice import (
    LawNotApplicable,
    check_distributive,
    check_orthomodular,
    find_diamond,
    incomparable,
    orthomodular_trials,
    verify_orthoalgebra,
)
from toeplitz_lattice.sampling import random_nested_pair, random_resolution
from toeplitz_lattice.subspace import EQUALITY_TOL, HilbertSpace, Subspace

C2 = HilbertSpace(2)


def three_lines():
    x = Subspace.span([[1, 0]], C2)
    y = Subspace.span([[0, 1]], C2)
    z = Subspace.span([[1, 1]], C2)
    return x, y, z


def test_distributive_law_fails_for_three_lines():
    report = check_distributive(*three_lines())
    print(report.to_dict()["defect"])
    assert not report.holds
    assert report.lhs.dim == 1
    assert report.rhs.dim == 0
    assert report.defect == pytest.approx(1.0)


def test_distributive_law_holds_for_coordinate_axes():
    e = np.eye(3)
    c3 = HilbertSpace(3)
    x = Subspace.span([e[0], e[1]], c3)
    y = Subspace.span([e[1]], c3)
    z = Subspace.span([e[2]], c3)
    assert check_distributive(x, y, z).holds


def test_diamond_in_c2():
    diamond = find_diamond(list(three_lines()))
    assert diamond is not None
    assert diamond.bottom.dim == 0
    assert diamond.top.dim == 2
    assert incomparable(diamond.left, diamond.right)


def test_chain_has_no_diamond():
    c3 = HilbertSpace(3)
    e = np.eye(3)
    chain = [Subspace.span(list(e[:r]), c3) for r in range(1, 4)]
    assert find_diamond(chain) is None


def test_orthomodular_needs_nested_pair():
    x, y, _ = three_lines()
    with pytest.raises(LawNotApplicable):
        check_orthomodular(x, y)


@settings(max_examples=60, deadline=None)
@given(
    dim=st.integers(min_value=2, max_value=8),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_orthomodular_law_on_random_pairs(dim: int, seed: int):
    x, z = random_nested_pair(dim, np.random.default_rng(seed))
    report = check_orthomodular(x, z)
    assert report.holds
    assert report.defect <= EQUALITY_TOL


def test_orthomodular_trials_is_reproducible():
    first = orthomodular_trials(5, 50, np.random.default_rng(42))
    second = orthomodular_trials(5, 50, np.random.default_rng(42))
    assert first == second
    assert first <= EQUALITY_TOL


def test_orthoalgebra_accepts_resolutions():
    parts = random_resolution(6, np.random.default_rng(3), parts=3)
    report = verify_orthoalgebra(parts)
    assert report.passed
    assert report.joined_dim == report.total_dim == 6
    assert report.checked_pairs == 3


def test_orthoalgebra_reports_overlap_without_raising():
    x, _, z = three_lines()
    report = verify_orthoalgebra([x, z])
    assert not report.passed
    kinds = {v.kind for v in report.violations}
    assert "orthogonality" in kinds
    assert report.worst("orthogonality") == pytest.approx(np.sqrt(0.5))


def test_orthoalgebra_catches_overlap_between_distant_components():
    c3 = HilbertSpace(3)
    family = [
        Subspace.span([[1, 0, 0]], c3),
        Subspace.span([[0, 1, 0]], c3),
        Subspace.span([[1, 0, 1]], c3),
    ]
    report = verify_orthoalgebra(family)
    assert not report.passed
    complements = {v.indices for v in report.violations if v.kind == "complement"}
    # the middle component is orthogonal to both others, its complement is still wrong
    assert (1,) in complements
    assert report.worst("complement") > 0.1
    assert {v.indices for v in report.violations if v.kind == "orthogonality"} == {(0, 2)}


def test_orthoalgebra_accepts_a_family_that_does_not_span():
    c3 = HilbertSpace(3)
    report = verify_orthoalgebra([Subspace.span([[1, 0, 0]], c3), Subspace.span([[0, 1, 0]], c3)])
    assert report.passed
    assert report.joined_dim == report.total_dim == 2


def test_empty_family():
    assert verify_orthoalgebra([]).passed
    with pytest.raises(LawNotApplicable):
        find_diamond([])

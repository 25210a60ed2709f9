import pytest
from rich import print

from toeplitz_lattice.lattice import verify_orthoalgebra
from toeplitz_lattice.quantization.decomposition import (
    ActionMismatch,
    decompose,
    isotype,
    selection_rule,
)
from toeplitz_lattice.quantization.geometry import GroupAction
from toeplitz_lattice.quantization.sections import HardySpace, build_sections
from toeplitz_lattice.subspace import leq

K = 12


@pytest.fixture(scope="module")
def hardy() -> HardySpace:
    return HardySpace(K)


@pytest.mark.parametrize(
    "action, atomic",
    [
        (GroupAction.circle(), False),
        (GroupAction.torus(), False),
        (GroupAction.su2(), False),
        (GroupAction.su2(), True),
    ],
)
def test_decomposition_is_an_orthoalgebra(hardy: HardySpace, action: GroupAction, atomic: bool):
    components = decompose(action, hardy, atomic=atomic)
    report = verify_orthoalgebra([c.subspace for c in components])
    print(report.to_dict()["components"], report.to_dict()["joined_dim"])
    assert report.passed
    assert report.total_dim == report.joined_dim == hardy.dim == (K + 1) * (K + 2) // 2


def test_circle_labels_are_tensor_powers(hardy: HardySpace):
    components = decompose(GroupAction.circle(), hardy)
    assert [c.labels for c in components] == [(0, k) for k in range(K + 1)]
    assert [c.dim for c in components] == [k + 1 for k in range(K + 1)]


def test_su2_components_are_irreducible(hardy: HardySpace):
    components = decompose(GroupAction.su2(), hardy)
    assert all(c.nu_g == c.nu_t for c in components)
    assert all(c.rep_dimension == c.nu_t + 1 and c.multiplicity == 1 for c in components)


def test_torus_components_refine_circle_components(hardy: HardySpace):
    circle = {c.nu_t: c.subspace for c in decompose(GroupAction.circle(), hardy)}
    for component in decompose(GroupAction.torus(), hardy):
        assert leq(component.subspace, circle[component.nu_t])


@pytest.mark.parametrize("k", range(0, 51, 7))
def test_selection_rule_against_weight_count(k: int):
    space = build_sections(k)
    for nu in range(-k - 2, k + 3):
        expected = sum(1 for a in range(k + 1) if k - 2 * a == nu)
        assert isotype(GroupAction.torus(), nu, k, space).dim == expected
        assert selection_rule(nu, k) == (expected == 1)


def test_include_empty_keeps_parity_gaps():
    components = decompose(GroupAction.torus(), build_sections(2), include_empty=True)
    assert [(c.nu_g, c.dim) for c in components] == [(-2, 1), (-1, 0), (0, 1), (1, 0), (2, 1)]


def test_isotype_outside_truncation_is_zero(hardy: HardySpace):
    assert isotype(GroupAction.torus(), 0, K + 2, hardy).dim == 0
    assert isotype(GroupAction.su2(), 3, 4, hardy).dim == 0
    assert isotype(GroupAction.su2(), 4, 4, hardy).dim == 5
    assert isotype(GroupAction.circle(), 7, 4, hardy).dim == 5


def test_atomic_view_only_for_su2():
    with pytest.raises(ActionMismatch):
        decompose(GroupAction.torus(), build_sections(2), atomic=True)

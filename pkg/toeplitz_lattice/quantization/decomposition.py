"""
Equivariant decomposition of the (truncated) Hardy space under a group action commuting with the
circle action.

For P1 every monomial z0^a z1^b spans a weight line of the torus with weight `b - a`, so the
isotypes are spans of monomials:

- circle: G is trivial, one component per k labelled (0, k);
- torus: component (nu, k) is the span of z0^a z1^b with b - a = nu, nonzero iff |nu| <= k and
  nu = k (mod 2);
- su2: each H0(P1, O(k)) is the irreducible representation Sym^k, a single component labelled
  (k, k) of representation dimension k + 1. The `atomic` view splits it further into the weight
  lines (b - a, k) of the maximal torus, which are the minimal projections used for
  probabilities.

Component vectors are columns of the Cholesky factor of the normalized quadrature Gram matrix,
so orthogonality of the components is checked against the computed inner product rather than
assumed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from typing_extensions import assert_never

from toeplitz_lattice.exception import BaseToeplitzLatticeException
from toeplitz_lattice.quantization.geometry import GroupAction
from toeplitz_lattice.quantization.sections import HardySpace, SectionSpace, SpaceLike
from toeplitz_lattice.subspace import HilbertSpace, Subspace, orthonormalize

logger = logging.getLogger(__name__)


class ActionMismatch(BaseToeplitzLatticeException):
    def __init__(self, action: GroupAction, detail: str):
        super().__init__(f"The {action.kind} action cannot be used here: {detail}")


@dataclass(frozen=True, eq=False)
class EquivariantComponent:
    """
    One isotype of the decomposition.

    params:
        nu_g:
            The G label: 0 for the circle, the torus weight, the su2 highest weight k (or the weight
            b - a in the atomic view).
        nu_t:
            The circle label, i.e. the tensor power k.
        subspace:
            The isotype as a subspace of the decomposed space.
        rep_dimension:
            Dimension of the irreducible G representation carried by the label.
        action:
            Kind of the decomposing action.
    """

    nu_g: int
    nu_t: int
    subspace: Subspace
    rep_dimension: int
    action: str

    @property
    def labels(self) -> tuple[int, int]:
        return self.nu_g, self.nu_t

    @property
    def dim(self) -> int:
        return self.subspace.dim

    @property
    def multiplicity(self) -> int:
        return self.dim // self.rep_dimension if self.rep_dimension else 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "action": self.action,
            "nu_g": self.nu_g,
            "nu_t": self.nu_t,
            "dim": self.dim,
            "rep_dimension": self.rep_dimension,
        }


def selection_rule(nu: int, k: int) -> bool:
    """True iff the torus weight `nu` occurs in H0(P1, O(k)): |nu| <= k and nu = k mod 2."""
    return abs(nu) <= k and (k - nu) % 2 == 0


def _blocks(space: SpaceLike) -> tuple[HilbertSpace, list[tuple[SectionSpace, int]]]:
    if isinstance(space, SectionSpace):
        return space.ambient, [(space, 0)]
    elif isinstance(space, HardySpace):
        return space.ambient, [(s, space.offsets[s.k]) for s in space.sections]
    else:
        assert_never(space)


def _monomial_vector(section: SectionSpace, offset: int, ambient: HilbertSpace, a: int) -> np.ndarray:
    vector = np.zeros(ambient.dim, dtype=complex)
    vector[offset : offset + section.dim] = section.isometry[:, a]
    return vector


def _component(
    action: GroupAction,
    nu_g: int,
    section: SectionSpace,
    offset: int,
    ambient: HilbertSpace,
    exponents: Sequence[int],
    rep_dimension: int,
) -> EquivariantComponent:
    vectors = [_monomial_vector(section, offset, ambient, a) for a in exponents]
    return EquivariantComponent(
        nu_g=nu_g,
        nu_t=section.k,
        subspace=orthonormalize(vectors, ambient),
        rep_dimension=rep_dimension,
        action=action.kind,
    )


def _block_components(
    action: GroupAction,
    section: SectionSpace,
    offset: int,
    ambient: HilbertSpace,
    atomic: bool,
    include_empty: bool,
) -> list[EquivariantComponent]:
    k = section.k
    if action.kind == "circle":
        return [_component(action, 0, section, offset, ambient, range(k + 1), 1)]
    elif action.kind == "torus" or (action.kind == "su2" and atomic):
        components = []
        for nu in range(-k, k + 1):
            if selection_rule(nu, k):
                exponents = [(k - nu) // 2]
            elif include_empty:
                exponents = []
            else:
                continue
            components.append(_component(action, nu, section, offset, ambient, exponents, 1))
        return components
    elif action.kind == "su2":
        return [_component(action, k, section, offset, ambient, range(k + 1), k + 1)]
    else:
        assert_never(action.kind)


def decompose(
    action: GroupAction,
    space: SpaceLike,
    *,
    atomic: bool = False,
    include_empty: bool = False,
) -> list[EquivariantComponent]:
    """
    Split `space` into isotypes of `action`, ordered by k and then by the G label.

    The components are pairwise orthogonal and their join is the whole space. With
    `include_empty`, torus labels of the wrong parity inside [-k, k] appear as zero components.

    Example:
        ```python
        from toeplitz_lattice.quantization.decomposition import decompose
        from toeplitz_lattice.quantization.geometry import GroupAction
        from toeplitz_lattice.quantization.sections import build_sections

        components = decompose(GroupAction.torus(), build_sections(3))
        assert [c.labels for c in components] == [(-3, 3), (-1, 3), (1, 3), (3, 3)]
        assert all(c.dim == 1 for c in components)
        ```
    """
    if atomic and action.kind != "su2":
        raise ActionMismatch(action, "only the su2 decomposition has an atomic refinement")
    ambient, blocks = _blocks(space)
    components: list[EquivariantComponent] = []
    for section, offset in blocks:
        components.extend(
            _block_components(action, section, offset, ambient, atomic, include_empty)
        )
    logger.debug("%s decomposition: %d components of %s", action.kind, len(components), ambient)
    return components


def isotype(
    action: GroupAction,
    nu_g: int,
    k: int,
    space: SpaceLike,
    *,
    atomic: bool = False,
) -> EquivariantComponent:
    """
    The component with labels (nu_g, k), possibly zero.

    A label violating the selection rule of the action gives the zero subspace, not an error.
    """
    if atomic and action.kind != "su2":
        raise ActionMismatch(action, "only the su2 decomposition has an atomic refinement")
    ambient, blocks = _blocks(space)
    matches = [(section, offset) for section, offset in blocks if section.k == k]
    if not matches:
        return EquivariantComponent(nu_g, k, Subspace.zero(ambient), 1, action.kind)
    section, offset = matches[0]

    if action.kind == "circle":
        # G is trivial, every label names the whole block
        nu_g = 0
        exponents: Sequence[int] = range(k + 1)
        rep_dimension = 1
    elif action.kind == "torus" or (action.kind == "su2" and atomic):
        exponents = [(k - nu_g) // 2] if selection_rule(nu_g, k) else []
        rep_dimension = 1
    elif action.kind == "su2":
        exponents = range(k + 1) if nu_g == k else []
        rep_dimension = k + 1 if nu_g == k else 1
    else:
        assert_never(action.kind)
    return _component(action, nu_g, section, offset, ambient, exponents, rep_dimension)

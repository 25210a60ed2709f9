"""
Lattice laws of the Hilbert lattice L(H).

The distributive law fails on L(H) while the orthomodular law holds. This module checks both laws
on concrete inputs, searches families of subspaces for diamond sublattices and verifies that a
family of pairwise orthogonal components (an equivariant decomposition) behaves as an orthoalgebra.

All checks are extensional: they compute both sides of a law and report the projector distance
between them.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Literal, Optional, Sequence

import numpy as np

from toeplitz_lattice.exception import BaseToeplitzLatticeException
from toeplitz_lattice.sampling import random_nested_pair
from toeplitz_lattice.subspace import (
    EQUALITY_TOL,
    AmbientMismatch,
    Subspace,
    join,
    join_all,
    leq,
    meet,
    ortho,
)

logger = logging.getLogger(__name__)

Law = Literal["distributive", "orthomodular"]


class LawNotApplicable(BaseToeplitzLatticeException):
    def __init__(self, law: Law, detail: str):
        super().__init__(f"The {law} law does not apply to these inputs: {detail}")


@dataclass(frozen=True, eq=False)
class LawReport:
    """
    Outcome of one lattice law check.

    `holds` is true exactly when `defect`, the projector distance between `lhs` and `rhs`,
    is at most the subspace equality tolerance.
    """

    law: Law
    holds: bool
    lhs: Subspace
    rhs: Subspace
    defect: float
    inputs: tuple[Subspace, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "law": self.law,
            "holds": self.holds,
            "defect": self.defect,
            "lhs_dim": self.lhs.dim,
            "rhs_dim": self.rhs.dim,
            "input_dims": [s.dim for s in self.inputs],
            "lhs": self.lhs.to_dict(),
            "rhs": self.rhs.to_dict(),
        }


@dataclass(frozen=True, eq=False)
class DiamondWitness:
    """A four element sublattice {bottom, left, right, top} with `left`, `right` incomparable."""

    bottom: Subspace
    left: Subspace
    right: Subspace
    top: Subspace

    def to_dict(self) -> dict[str, Any]:
        return {
            name: {"dim": s.dim, "subspace": s.to_dict()}
            for name, s in (
                ("bottom", self.bottom),
                ("left", self.left),
                ("right", self.right),
                ("top", self.top),
            )
        }


ViolationKind = Literal["orthogonality", "direct_sum", "complement", "orthomodular"]


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    indices: tuple[int, ...]
    defect: float


@dataclass(frozen=True)
class OrthoalgebraReport:
    components: int
    total_dim: int
    joined_dim: int
    checked_pairs: int
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return not self.violations

    def worst(self, kind: ViolationKind) -> float:
        return max((v.defect for v in self.violations if v.kind == kind), default=0.0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "components": self.components,
            "total_dim": self.total_dim,
            "joined_dim": self.joined_dim,
            "checked_pairs": self.checked_pairs,
            "violations": [
                {"kind": v.kind, "indices": list(v.indices), "defect": v.defect}
                for v in self.violations
            ],
        }


def _check_shared_ambient(subspaces: Sequence[Subspace]):
    for other in subspaces[1:]:
        if other.ambient != subspaces[0].ambient:
            raise AmbientMismatch(subspaces[0].ambient, other.ambient)


def check_distributive(x: Subspace, y: Subspace, z: Subspace) -> LawReport:
    """
    Compare X meet (Y join Z) with (X meet Y) join (X meet Z).

    Example:
        ```python
        import numpy as np
        from toeplitz_lattice.lattice import check_distributive
        from toeplitz_lattice.subspace import HilbertSpace, Subspace

        c2 = HilbertSpace(2)
        x = Subspace.span([[1, 0]], c2)
        y = Subspace.span([[0, 1]], c2)
        z = Subspace.span([[1, 1]], c2)
        report = check_distributive(x, y, z)
        assert not report.holds
        assert (report.lhs.dim, report.rhs.dim) == (1, 0)
        ```
    """
    _check_shared_ambient([x, y, z])
    lhs = meet(x, join(y, z))
    rhs = join(meet(x, y), meet(x, z))
    defect = lhs.distance(rhs)
    return LawReport(
        law="distributive",
        holds=defect <= EQUALITY_TOL,
        lhs=lhs,
        rhs=rhs,
        defect=defect,
        inputs=(x, y, z),
    )


def check_orthomodular(x: Subspace, z: Subspace) -> LawReport:
    """
    Compare X with (X meet Z^perp) join Z, for Z contained in X.

    Raises `LawNotApplicable` when Z is not contained in X; this is not a failure of the law.
    """
    _check_shared_ambient([x, z])
    if not leq(z, x):
        raise LawNotApplicable("orthomodular", "Z must be contained in X")
    rhs = join(meet(x, ortho(z)), z)
    defect = x.distance(rhs)
    return LawReport(
        law="orthomodular",
        holds=defect <= EQUALITY_TOL,
        lhs=x,
        rhs=rhs,
        defect=defect,
        inputs=(x, z),
    )


def incomparable(a: Subspace, b: Subspace) -> bool:
    return not leq(a, b) and not leq(b, a)


def find_diamond(family: Sequence[Subspace]) -> Optional[DiamondWitness]:
    """
    Return a diamond built on the first incomparable pair of `family`, or None.

    The search is exhaustive over pairs, in family order.
    """
    if not family:
        raise LawNotApplicable("distributive", "the family is empty")
    _check_shared_ambient(family)
    for a, b in itertools.combinations(family, 2):
        if incomparable(a, b):
            return DiamondWitness(bottom=meet(a, b), left=a, right=b, top=join(a, b))
    return None


def verify_orthoalgebra(components: Sequence[Subspace]) -> OrthoalgebraReport:
    """
    Check that `components` behave like the isotypes of an equivariant decomposition.

    Checked:

    - pairwise orthogonality, defect |P_i P_j| for i != j;
    - direct sums, the join of every pair, of every prefix and of the whole family has the
      summed dimension;
    - orthocomplements inside the family: the complement of component i within the join of the
      family is the sum of the other components (the plain orthocomplement when the family spans
      the ambient space);
    - the orthomodular law for Z = component i and X ranging over the prefix join ending at i,
      the suffix join starting at i, the join of i with the component halfway around the family
      and the join of the whole family.

    Violations are report content, never exceptions.

    Example:
        ```python
        from toeplitz_lattice.lattice import verify_orthoalgebra
        from toeplitz_lattice.subspace import HilbertSpace, Subspace

        c3 = HilbertSpace(3)
        axes = [Subspace.span([e], c3) for e in ([1, 0, 0], [0, 1, 0], [0, 0, 1])]
        assert verify_orthoalgebra(axes).passed
        ```
    """
    if not components:
        return OrthoalgebraReport(0, 0, 0, 0)
    _check_shared_ambient(components)
    ambient = components[0].ambient
    violations: list[Violation] = []
    pairs = 0
    n = len(components)

    for (i, a), (j, b) in itertools.combinations(enumerate(components), 2):
        pairs += 1
        if a.dim and b.dim:
            overlap = float(np.linalg.norm(a.basis.conj().T @ b.basis, 2))
            if overlap > EQUALITY_TOL:
                violations.append(Violation("orthogonality", (i, j), overlap))
        joined = join(a, b)
        if joined.dim != a.dim + b.dim:
            violations.append(
                Violation("direct_sum", (i, j), float(a.dim + b.dim - joined.dim))
            )

    prefixes: list[Subspace] = []
    running = Subspace.zero(ambient)
    for component in components:
        running = join(running, component)
        prefixes.append(running)
    suffixes: list[Subspace] = []
    running = Subspace.zero(ambient)
    for component in reversed(components):
        running = join(component, running)
        suffixes.append(running)
    suffixes.reverse()

    summed = 0
    for m, prefix in enumerate(prefixes):
        summed += components[m].dim
        if prefix.dim != summed and m > 1:
            violations.append(Violation("direct_sum", tuple(range(m + 1)), float(summed - prefix.dim)))

    total_dim = summed
    whole = prefixes[-1]
    projector_sum = sum(c.projector for c in components)
    for i, z in enumerate(components):
        complement = meet(whole, ortho(z))
        defect = float(np.linalg.norm(complement.projector - (projector_sum - z.projector), 2))
        if defect > EQUALITY_TOL:
            violations.append(Violation("complement", (i,), defect))

    for i, z in enumerate(components):
        targets = [prefixes[i], suffixes[i], whole]
        if n > 1:
            targets.append(join(z, components[(i + n // 2) % n]))
        for x in targets:
            report = check_orthomodular(x, z)
            if not report.holds:
                violations.append(Violation("orthomodular", (i,), report.defect))

    if violations:
        logger.warning("orthoalgebra check found %d violations", len(violations))
    return OrthoalgebraReport(
        components=n,
        total_dim=total_dim,
        joined_dim=whole.dim,
        checked_pairs=pairs,
        violations=tuple(violations),
    )


def orthomodular_trials(dim: int, trials: int, rng: np.random.Generator) -> float:
    """Run the orthomodular law on `trials` Haar-random pairs Z in X of C^dim, return the worst defect."""
    worst = 0.0
    for _ in range(trials):
        x, z = random_nested_pair(dim, rng)
        worst = max(worst, check_orthomodular(x, z).defect)
    return worst

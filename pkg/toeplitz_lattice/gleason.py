"""
Density operators and the probabilities they assign to subspaces, `p_T(P) = Tr(T P)`.

Every density operator gives a countably additive probability on the Hilbert lattice; in
dimension at least 3 every such probability arises this way. In dimension 2 the converse fails,
so the functions still compute `Tr(T P)` but warn that the correspondence is not guaranteed.
"""

from __future__ import annotations

import csv
import io
import itertools
import logging
import warnings
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np
import scipy.linalg

from toeplitz_lattice.exception import BaseToeplitzLatticeException
from toeplitz_lattice.sampling import random_density_matrix
from toeplitz_lattice.subspace import (
    EQUALITY_TOL,
    AmbientMismatch,
    DimensionMismatch,
    HilbertSpace,
    Operator,
    Subspace,
    join_all,
)

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
POSITIVITY_TOL = 1e-10
TRACE_TOL = 1e-10
CLAMP_TOL = 1e-10
ADDITIVITY_TOL = 1e-9

PROBABILITY_CSV_HEADER = ("component", "dimension", "raw", "probability", "clamped")


class GleasonDimensionWarning(UserWarning):
    """The ambient dimension is below 3, where probabilities need not come from a density operator."""


class InvalidDensityOperator(BaseToeplitzLatticeException):
    pass


class NotHermitian(BaseToeplitzLatticeException):
    def __init__(self, defect: float):
        super().__init__(f"Operator is not Hermitian, max |A - A^H| = {defect:.3e}")


class NonOrthogonalParts(BaseToeplitzLatticeException):
    def __init__(self, i: int, j: int, overlap: float):
        super().__init__(f"Parts {i} and {j} are not orthogonal, |P_i P_j| = {overlap:.3e}")


@dataclass(frozen=True, eq=False)
class DensityOperator(Operator):
    """
    A positive semi-definite Hermitian operator of trace one.

    Example:
        ```python
        import numpy as np
        from toeplitz_lattice.gleason import DensityOperator, gleason_probability
        from toeplitz_lattice.subspace import HilbertSpace, Subspace

        c3 = HilbertSpace(3)
        rho = DensityOperator.maximally_mixed(c3)
        plane = Subspace.span([[1, 0, 0], [0, 1, 0]], c3)
        assert np.isclose(gleason_probability(rho, plane), 2 / 3)
        ```
    """

    def __post_init__(self):
        super().__post_init__()
        hermitian = self.hermitian_defect()
        if hermitian > HERMITIAN_TOL:
            raise InvalidDensityOperator(f"Not Hermitian, max |T - T^H| = {hermitian:.3e}")
        eigenvalues = np.linalg.eigvalsh(self.matrix)
        if eigenvalues[0] < -POSITIVITY_TOL:
            raise InvalidDensityOperator(f"Not positive, smallest eigenvalue {eigenvalues[0]:.3e}")
        trace = float(np.trace(self.matrix).real)
        if abs(trace - 1) > TRACE_TOL:
            raise InvalidDensityOperator(f"Trace is {trace!r}, expected 1")

    @classmethod
    def maximally_mixed(cls, ambient: HilbertSpace) -> DensityOperator:
        return cls(ambient, np.eye(ambient.dim) / ambient.dim)

    @classmethod
    def pure(cls, vector: Any, ambient: Optional[HilbertSpace] = None) -> DensityOperator:
        psi = np.asarray(vector, dtype=complex).reshape(-1)
        ambient = ambient or HilbertSpace(psi.size)
        if psi.size != ambient.dim:
            raise DimensionMismatch(ambient.dim, psi.size)
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise InvalidDensityOperator("A pure state needs a nonzero vector")
        psi = psi / norm
        return cls(ambient, np.outer(psi, psi.conj()))

    @classmethod
    def from_projector(cls, subspace: Subspace) -> DensityOperator:
        """The normalized projector P / dim P."""
        if subspace.dim == 0:
            raise InvalidDensityOperator("The zero subspace has no normalized projector")
        projector = subspace.projector
        return cls(subspace.ambient, (projector + projector.conj().T) / (2 * subspace.dim))

    @classmethod
    def random(
        cls, ambient: HilbertSpace, rng: np.random.Generator, rank: Optional[int] = None
    ) -> DensityOperator:
        return cls(ambient, random_density_matrix(ambient.dim, rng, rank))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True)
class ProbabilityReport:
    """A probability with the raw value it was clamped from."""

    label: str
    dimension: int
    raw: float
    value: float
    clamped: bool

    def to_row(self) -> tuple[Any, ...]:
        return (self.label, self.dimension, self.raw, self.value, self.clamped)


def _warn_small_dimension(ambient: HilbertSpace):
    if ambient.dim < 3:
        warnings.warn(
            f"Ambient dimension {ambient.dim} < 3: not every probability on this lattice comes "
            f"from a density operator",
            GleasonDimensionWarning,
            stacklevel=3,
        )


def _raw_probability(state: Operator, subspace: Subspace) -> float:
    if state.ambient != subspace.ambient:
        raise AmbientMismatch(state.ambient, subspace.ambient)
    if subspace.dim == 0:
        return 0.0
    basis = subspace.basis
    return float(np.trace(basis.conj().T @ state.matrix @ basis).real)


def _clamp(raw: float) -> tuple[float, bool]:
    if -CLAMP_TOL <= raw < 0:
        return 0.0, True
    if 1 < raw <= 1 + CLAMP_TOL:
        return 1.0, True
    return raw, False


def gleason_probability(state: DensityOperator, subspace: Subspace) -> float:
    """
    `Tr(T P)`, clamped to [0, 1] when it strays out by at most 1e-10.

    Emits `GleasonDimensionWarning` when the ambient dimension is below 3.
    """
    _warn_small_dimension(state.ambient)
    value, _ = _clamp(_raw_probability(state, subspace))
    return value


def probability_report(state: DensityOperator, subspace: Subspace, label: str = "") -> ProbabilityReport:
    _warn_small_dimension(state.ambient)
    raw = _raw_probability(state, subspace)
    value, clamped = _clamp(raw)
    return ProbabilityReport(label, subspace.dim, raw, value, clamped)


def trace(operator: Operator) -> complex:
    return complex(np.trace(operator.matrix))


def expectation(state: DensityOperator, observable: Operator) -> complex:
    """`Tr(T A)`."""
    if state.ambient != observable.ambient:
        raise AmbientMismatch(state.ambient, observable.ambient)
    return complex(np.sum(state.matrix * observable.matrix.T))


@dataclass(frozen=True, eq=False)
class SpectralResolution:
    """
    `A = sum_i eigenvalues[i] P_i` with mutually orthogonal eigenspaces summing to the identity.
    Eigenvalues are increasing.
    """

    ambient: HilbertSpace
    eigenvalues: tuple[float, ...]
    projectors: tuple[Subspace, ...]

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(p.dim for p in self.projectors)

    def reconstruct(self) -> np.ndarray:
        return sum(
            (value * p.projector for value, p in zip(self.eigenvalues, self.projectors)),
            np.zeros((self.ambient.dim, self.ambient.dim), dtype=complex),
        )

    def reconstruction_error(self, operator: Operator) -> float:
        return float(np.linalg.norm(self.reconstruct() - operator.matrix, 2))

    def to_dict(self) -> dict[str, Any]:
        return {
            "eigenvalues": list(self.eigenvalues),
            "multiplicities": list(self.multiplicities),
        }


def spectral_decompose(operator: Operator, hermitian_tol: float = POSITIVITY_TOL) -> SpectralResolution:
    """
    Eigenspace decomposition of a Hermitian operator.

    An eigenvalue within `1e-8 (|A| + 1)` of the smallest eigenvalue of the current cluster joins
    that cluster, so merged eigenvalues never spread wider than the gap.

    Example:
        ```python
        import numpy as np
        from toeplitz_lattice.gleason import spectral_decompose
        from toeplitz_lattice.subspace import HilbertSpace, Operator

        a = Operator(HilbertSpace(3), np.diag([2.0, 1.0, 2.0]))
        resolution = spectral_decompose(a)
        assert resolution.eigenvalues == (1.0, 2.0)
        assert resolution.multiplicities == (1, 2)
        ```
    """
    defect = operator.hermitian_defect()
    if defect > hermitian_tol:
        raise NotHermitian(defect)
    matrix = (operator.matrix + operator.matrix.conj().T) / 2
    values, vectors = scipy.linalg.eigh(matrix)
    gap = 1e-8 * (float(np.max(np.abs(values))) + 1)

    groups: list[list[int]] = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[groups[-1][0]] <= gap:
            groups[-1].append(i)
        else:
            groups.append([i])

    eigenvalues = tuple(float(np.mean(values[g])) for g in groups)
    projectors = tuple(Subspace(operator.ambient, vectors[:, g]) for g in groups)
    return SpectralResolution(operator.ambient, eigenvalues, projectors)


@dataclass(frozen=True)
class AdditivityReport:
    probabilities: tuple[float, ...]
    total: float
    joined: float
    defect: float
    resolves_identity: bool

    @property
    def holds(self) -> bool:
        if self.defect > ADDITIVITY_TOL:
            return False
        return not self.resolves_identity or abs(self.total - 1) <= ADDITIVITY_TOL

    def to_dict(self) -> dict[str, Any]:
        return {
            "probabilities": list(self.probabilities),
            "total": self.total,
            "joined": self.joined,
            "defect": self.defect,
            "resolves_identity": self.resolves_identity,
            "holds": self.holds,
        }


def check_additivity(state: DensityOperator, parts: Sequence[Subspace]) -> AdditivityReport:
    """
    Compare `p(join of parts)` with `sum p(part)` for pairwise orthogonal parts.

    When the parts resolve the identity the total must also be 1.
    """
    for (i, a), (j, b) in itertools.combinations(enumerate(parts), 2):
        if a.dim and b.dim:
            overlap = float(np.linalg.norm(a.basis.conj().T @ b.basis, 2))
            if overlap > EQUALITY_TOL:
                raise NonOrthogonalParts(i, j, overlap)
    probabilities = tuple(gleason_probability(state, p) for p in parts)
    whole = join_all(parts, state.ambient)
    joined = gleason_probability(state, whole)
    total = float(sum(probabilities))
    report = AdditivityReport(
        probabilities=probabilities,
        total=total,
        joined=joined,
        defect=abs(joined - total),
        resolves_identity=whole.dim == state.ambient.dim,
    )
    if not report.holds:
        logger.warning("additivity fails: sum %.12g against %.12g", total, joined)
    return report


def probability_table(reports: Sequence[ProbabilityReport]) -> str:
    """CSV text with one row per component."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(PROBABILITY_CSV_HEADER)
    for report in reports:
        writer.writerow(report.to_row())
    return buffer.getvalue()

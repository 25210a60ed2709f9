"""
This section is about the raw material of the Hilbert lattice: finite-dimensional complex
inner-product spaces, their closed subspaces and the operators acting on them.

A `Subspace` is always stored as an orthonormal column basis. Its projector is derived on demand and
never stored as primary data, so the two representations can not drift apart.

All values are immutable after construction and every operation is a pure function.

Two subspaces are considered equal when their projectors are closer than `EQUALITY_TOL` in operator
norm. This is the single equality notion used by every lattice law check in the package.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Optional, Sequence

import numpy as np
import scipy.linalg

from toeplitz_lattice.exception import BaseToeplitzLatticeException

logger = logging.getLogger(__name__)

RANK_TOL = 1e-9
"""Relative residual below which a direction is considered linearly dependent."""

EQUALITY_TOL = 1e-8
"""Projector distance (operator norm) below which two subspaces are equal."""


class EmptyAmbient(BaseToeplitzLatticeException):
    def __init__(self, detail: str):
        super().__init__(f"Can not determine the ambient space: {detail}")


class DimensionMismatch(BaseToeplitzLatticeException):
    def __init__(self, expected: int, got: int, what: str = "vector"):
        super().__init__(
            f"Expected a {what} of ambient dimension {expected}, got dimension {got}."
        )


class AmbientMismatch(BaseToeplitzLatticeException):
    def __init__(self, left: HilbertSpace, right: HilbertSpace):
        super().__init__(
            f"Operands live in different spaces: {left!r} and {right!r}.\n"
            "Lattice operations are only defined inside one ambient space, "
            "embed both operands first."
        )


class InvalidSubspace(BaseToeplitzLatticeException):
    pass


@dataclass(frozen=True)
class HilbertSpace:
    """
    A finite-dimensional complex inner-product space C^dim.

    params:
        dim:
            The dimension, at least 1.
        label:
            Free-form text used in reports, e.g. `"H0(P1,O(3))"`.
    """

    dim: int
    label: str = ""

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise EmptyAmbient(f"dimension must be a positive integer, got {self.dim!r}")


def _as_matrix(values: Any, rows: int) -> np.ndarray:
    matrix = np.array(values, dtype=complex)
    if matrix.ndim == 1:
        matrix = matrix.reshape(rows, -1) if matrix.size else np.zeros((rows, 0), complex)
    return matrix


@dataclass(frozen=True, eq=False)
class Subspace:
    """
    A closed linear subspace, canonically represented by an orthonormal basis.

    params:
        ambient:
            The space the subspace lives in.
        basis:
            Complex matrix of shape `(ambient.dim, r)` with orthonormal columns, `r = 0` is allowed.
        tol:
            Numerical rank tolerance used when the subspace was built.

    Example:
        ```python
        import numpy as np
        from toeplitz_lattice.subspace import HilbertSpace, Subspace

        c2 = HilbertSpace(2)
        line = Subspace.span([np.array([1.0, 1.0])], c2)
        assert line.dim == 1
        assert np.allclose(line.projector, [[0.5, 0.5], [0.5, 0.5]])
        ```
    """

    ambient: HilbertSpace
    basis: np.ndarray
    tol: float = RANK_TOL

    def __post_init__(self):
        basis = _as_matrix(self.basis, self.ambient.dim)
        if basis.ndim != 2 or basis.shape[0] != self.ambient.dim:
            raise DimensionMismatch(
                self.ambient.dim, basis.shape[0] if basis.ndim else 0, "basis"
            )
        if self.tol < 0:
            raise InvalidSubspace(f"Rank tolerance must be nonnegative, got {self.tol}")

        if basis.shape[1]:
            gram_defect = np.max(np.abs(basis.conj().T @ basis - np.eye(basis.shape[1])))
            if gram_defect > max(self.tol, 1e-10):
                raise InvalidSubspace(
                    f"Basis columns are not orthonormal (max Gram defect {gram_defect:.3e}). "
                    "Build subspaces with `orthonormalize` or `Subspace.span` instead."
                )

        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient!r})"

    @classmethod
    def zero(cls, ambient: HilbertSpace) -> Subspace:
        return cls(ambient, np.zeros((ambient.dim, 0), dtype=complex))

    @classmethod
    def full(cls, ambient: HilbertSpace) -> Subspace:
        return cls(ambient, np.eye(ambient.dim, dtype=complex))

    @classmethod
    def span(
        cls,
        vectors: Sequence[Any],
        ambient: Optional[HilbertSpace] = None,
        tol: float = RANK_TOL,
    ) -> Subspace:
        """Shortcut for `orthonormalize`."""
        return orthonormalize(vectors, ambient=ambient, tol=tol)

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    @cached_property
    def projector(self) -> np.ndarray:
        projector = self.basis @ self.basis.conj().T
        projector.setflags(write=False)
        return projector

    def distance(self, other: Subspace) -> float:
        """Operator-norm distance between the two projectors."""
        _check_same_ambient(self, other)
        return projector_distance(self.projector, other.projector)

    def equals(self, other: Subspace, tol: float = EQUALITY_TOL) -> bool:
        return self.dim == other.dim and self.distance(other) <= tol

    def contains(self, vector: Any, tol: float = EQUALITY_TOL) -> bool:
        v = np.asarray(vector, dtype=complex)
        if v.shape != (self.ambient.dim,):
            raise DimensionMismatch(self.ambient.dim, v.size)
        norm = np.linalg.norm(v)
        if norm == 0:
            return True
        residual = v - self.basis @ (self.basis.conj().T @ v)
        return float(np.linalg.norm(residual)) <= tol * norm

    def to_dict(self) -> dict[str, Any]:
        return {
            "dim": self.ambient.dim,
            "basis_real": self.basis.real.tolist(),
            "basis_imag": self.basis.imag.tolist(),
            "tol": self.tol,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], label: str = "") -> Subspace:
        dim = int(data["dim"])
        real = np.array(data["basis_real"], dtype=float)
        imag = np.array(data["basis_imag"], dtype=float)
        basis = (real + 1j * imag) if real.size else np.zeros((dim, 0), dtype=complex)
        return cls(HilbertSpace(dim, label), basis, float(data.get("tol", RANK_TOL)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str, label: str = "") -> Subspace:
        return cls.from_dict(json.loads(text), label)


@dataclass(frozen=True, eq=False)
class Operator:
    """
    A linear operator on a finite-dimensional Hilbert space, as a `dim x dim` matrix.

    No Hermiticity or positivity is assumed; consumers assert what they need.
    """

    ambient: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        n = self.ambient.dim
        if matrix.shape != (n, n):
            raise DimensionMismatch(n, matrix.shape[0] if matrix.ndim else 0, "square matrix")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    def hermitian_defect(self) -> float:
        """Largest elementwise deviation from Hermiticity."""
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def norm(self) -> float:
        """Operator (spectral) norm."""
        return float(np.linalg.norm(self.matrix, 2))

    def adjoint(self) -> Operator:
        return Operator(self.ambient, self.matrix.conj().T)

    def to_dict(self) -> dict[str, Any]:
        return {
            "dim": self.ambient.dim,
            "matrix_real": self.matrix.real.tolist(),
            "matrix_imag": self.matrix.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], label: str = "") -> Operator:
        real = np.array(data["matrix_real"], dtype=float)
        imag = np.array(data["matrix_imag"], dtype=float)
        return cls(HilbertSpace(int(data["dim"]), label), real + 1j * imag)


def projector_distance(left: np.ndarray, right: np.ndarray) -> float:
    difference = left - right
    if not difference.size:
        return 0.0
    return float(np.linalg.norm(difference, 2))


def _check_same_ambient(left: Subspace, right: Subspace):
    if left.ambient != right.ambient:
        raise AmbientMismatch(left.ambient, right.ambient)


def orthonormalize(
    vectors: Sequence[Any],
    ambient: Optional[HilbertSpace] = None,
    tol: float = RANK_TOL,
) -> Subspace:
    """
    Return the span of `vectors` with an orthonormal basis.

    Vectors are processed in the given order (Gram-Schmidt with one re-orthogonalization pass),
    so the result is reproducible. A direction is discarded when its residual norm is at most
    `tol` times the largest input norm.

    params:
        vectors:
            Complex vectors sharing one ambient dimension. May be empty.
        ambient:
            The ambient space. Required when `vectors` is empty, inferred otherwise.
        tol:
            Relative rank tolerance, must be positive.

    Example:
        ```python
        import numpy as np
        from toeplitz_lattice.subspace import orthonormalize

        e1 = np.array([1.0, 0.0])
        assert orthonormalize([e1, 2 * e1]).dim == 1
        assert orthonormalize([e1 + [0, 1], e1 - [0, 1]]).dim == 2
        ```
    """
    if tol <= 0:
        raise InvalidSubspace(f"Rank tolerance must be positive, got {tol}")

    arrays = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
    if ambient is None:
        if not arrays:
            raise EmptyAmbient("no vectors were given and no ambient space was passed")
        ambient = HilbertSpace(arrays[0].size)
    for v in arrays:
        if v.size != ambient.dim:
            raise DimensionMismatch(ambient.dim, v.size)

    scale = max((float(np.linalg.norm(v)) for v in arrays), default=0.0)
    if scale == 0.0:
        return Subspace(ambient, np.zeros((ambient.dim, 0), dtype=complex), tol)

    columns: list[np.ndarray] = []
    for v in arrays:
        w = v.copy()
        if columns:
            q = np.column_stack(columns)
            for _ in range(2):
                w = w - q @ (q.conj().T @ w)
        norm = float(np.linalg.norm(w))
        if norm <= tol * scale:
            continue
        columns.append(w / norm)

    if not columns:
        return Subspace(ambient, np.zeros((ambient.dim, 0), dtype=complex), tol)
    return Subspace(ambient, np.column_stack(columns), tol)


def leq(a: Subspace, b: Subspace, tol: float = EQUALITY_TOL) -> bool:
    """True iff `a` is contained in `b`, i.e. P_B P_A = P_A within `tol`."""
    _check_same_ambient(a, b)
    if a.dim == 0:
        return True
    if a.dim > b.dim:
        return False
    residual = a.basis - b.basis @ (b.basis.conj().T @ a.basis)
    return float(np.linalg.norm(residual, 2)) <= tol


def meet(a: Subspace, b: Subspace) -> Subspace:
    """
    Intersection of two subspaces.

    Built from the principal vectors of the pair: the left singular vectors of `B_A^H B_B`, mapped
    into A, whose distance to B is at most half the equality tolerance. The result is therefore
    contained in both inputs in the sense of `leq`.
    """
    _check_same_ambient(a, b)
    tol = max(a.tol, b.tol)
    if leq(a, b):
        return a
    if leq(b, a):
        return b

    left, _, _ = scipy.linalg.svd(a.basis.conj().T @ b.basis)
    candidates = a.basis @ left
    residual = candidates - b.basis @ (b.basis.conj().T @ candidates)
    sines = np.linalg.norm(residual, axis=0)
    shared = candidates[:, sines <= EQUALITY_TOL / 2]
    logger.debug("meet: %d shared directions of %d", shared.shape[1], a.dim)
    return Subspace(a.ambient, shared, tol)


def join(a: Subspace, b: Subspace) -> Subspace:
    """Smallest subspace containing both: the orthonormalized span of the two bases."""
    _check_same_ambient(a, b)
    if b.dim == 0:
        return a
    if a.dim == 0:
        return b
    return orthonormalize(
        list(a.basis.T) + list(b.basis.T), a.ambient, max(a.tol, b.tol)
    )


def ortho(a: Subspace) -> Subspace:
    """Orthogonal complement of `a` in its ambient space."""
    n = a.ambient.dim
    if a.dim == 0:
        return Subspace.full(a.ambient)
    if a.dim == n:
        return Subspace.zero(a.ambient)
    complement = scipy.linalg.null_space(a.basis.conj().T)
    return Subspace(a.ambient, complement, a.tol)


def join_all(parts: Sequence[Subspace], ambient: HilbertSpace) -> Subspace:
    result = Subspace.zero(ambient)
    for part in parts:
        result = join(result, part)
    return result

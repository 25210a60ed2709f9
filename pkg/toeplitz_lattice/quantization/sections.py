"""
Holomorphic sections of O(k) on P1 and the truncated Hardy space of the circle bundle.

`H0(P1, O(k))` is realized by homogeneous polynomials of degree k with the monomial basis
`z0^a z1^(k-a)`, `a = 0..k`. The Fubini-Study inner product makes the monomials orthogonal with

    <z0^a z1^b, z0^a z1^b> = volume * a! b! / (k + 1)! = volume * B(a + 1, b + 1)

and `build_sections` computes the Gram matrix both ways, by quadrature and from this closed form.

Coordinates: an operator or vector "on a section space" is always expressed in the orthonormal
basis `s_a / |s_a|` of normalized monomials, indexed by the exponent `a` of `z0`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Any, Optional, Union

import numpy as np
import scipy.linalg
import scipy.special

from toeplitz_lattice.exception import BaseToeplitzLatticeException
from toeplitz_lattice.quantization.geometry import (
    DEFAULT_VOLUME,
    InvalidQuantumNumber,
    QuantizedGeometry,
    as_points,
    unit_lift,
)
from toeplitz_lattice.subspace import DimensionMismatch, HilbertSpace, Operator

logger = logging.getLogger(__name__)

GRAM_RTOL = 1e-10
GRAM_OFFDIAG_RTOL = 1e-12


class GramMismatch(BaseToeplitzLatticeException):
    def __init__(self, k: int, detail: str):
        super().__init__(
            f"Quadrature Gram matrix of H0(P1,O({k})) disagrees with the closed form: {detail}"
        )


class InconsistentTruncation(BaseToeplitzLatticeException):
    def __init__(self, k_min: int, k_max: int):
        super().__init__(
            f"Truncation bounds must satisfy 0 <= k_min <= k_max, got k_min={k_min}, k_max={k_max}"
        )


def closed_form_norms(k: int, volume: float = DEFAULT_VOLUME) -> np.ndarray:
    """Squared norms volume * a! (k-a)! / (k+1)! of the monomials, indexed by a."""
    a = np.arange(k + 1)
    return volume * scipy.special.beta(a + 1, k - a + 1)


def monomial_values(k: int, points: np.ndarray) -> np.ndarray:
    """Matrix `(n, k+1)` of z0^a z1^(k-a) at the given representatives (no rescaling)."""
    a = np.arange(k + 1)
    return points[:, :1] ** a * points[:, 1:] ** (k - a)


@dataclass(frozen=True, eq=False)
class SectionSpace:
    """
    The quantization space H0(P1, O(k)) with its monomial basis and Gram matrix.

    params:
        geometry:
            Conventions (k, volume, quadrature) the space was built with.
        monomials:
            Exponent pairs (a, b), a + b = k, in basis order.
        gram:
            Quadrature Gram matrix `gram[a, b] = <s_a, s_b>` of the monomials.
        closed_form:
            Closed-form squared norms of the monomials.
        orthobasis:
            Change of basis from orthonormal coordinates to monomial coefficients.
        isometry:
            Upper Cholesky factor R of the normalized quadrature Gram (transposed), so that the
            quadrature inner product of two sections with orthonormal coordinates u, v is
            `(R v)^H (R u)`.
    """

    geometry: QuantizedGeometry
    monomials: tuple[tuple[int, int], ...]
    gram: np.ndarray
    closed_form: np.ndarray
    orthobasis: np.ndarray
    isometry: np.ndarray

    @property
    def k(self) -> int:
        return self.geometry.k

    @property
    def dim(self) -> int:
        return self.geometry.k + 1

    @property
    def volume(self) -> float:
        return self.geometry.volume_normalization

    @cached_property
    def ambient(self) -> HilbertSpace:
        return HilbertSpace(self.dim, f"H0(P1,O({self.k}))")

    def evaluate(self, points: Any) -> np.ndarray:
        """Monomial values at the given homogeneous representatives, shape `(n, k+1)`."""
        return monomial_values(self.k, as_points(points))

    def evaluate_orthonormal(self, points: Any) -> np.ndarray:
        """Values of the orthonormal sections at the given representatives, shape `(n, k+1)`."""
        return self.evaluate(points) / np.sqrt(self.closed_form)

    def identity(self) -> Operator:
        return Operator(self.ambient, np.eye(self.dim))

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "dim": self.dim,
            "volume": self.volume,
            "quadrature_degree": self.geometry.rule.exactness_degree,
            "monomials": [list(m) for m in self.monomials],
            "gram_diagonal": np.diag(self.gram).real.tolist(),
            "closed_form": self.closed_form.tolist(),
        }


@lru_cache(maxsize=128)
def _build_sections(geometry: QuantizedGeometry) -> SectionSpace:
    k = geometry.k
    rule = geometry.rule
    nodes = rule.nodes(geometry.volume_normalization)
    values = monomial_values(k, nodes.points)
    gram = (values.T * nodes.weights) @ values.conj()
    closed = closed_form_norms(k, geometry.volume_normalization)
    logger.debug("k=%d: %d quadrature nodes", k, nodes.weights.size)

    diagonal = np.diag(gram).real
    relative = np.abs(diagonal - closed) / closed
    if np.max(relative) > GRAM_RTOL:
        raise GramMismatch(k, f"max relative diagonal error {np.max(relative):.3e}")
    off = gram - np.diag(np.diag(gram))
    if off.size and np.max(np.abs(off)) > GRAM_OFFDIAG_RTOL * np.max(closed):
        raise GramMismatch(k, f"off-diagonal entry {np.max(np.abs(off)):.3e} is not negligible")

    scale = 1 / np.sqrt(closed)
    normalized = gram * np.outer(scale, scale)
    normalized = (normalized + normalized.conj().T) / 2
    isometry = scipy.linalg.cholesky(normalized.T, lower=False)

    for array in (gram, closed, isometry):
        array.setflags(write=False)
    orthobasis = np.diag(scale)
    orthobasis.setflags(write=False)
    return SectionSpace(
        geometry=geometry,
        monomials=tuple((a, k - a) for a in range(k + 1)),
        gram=gram,
        closed_form=closed,
        orthobasis=orthobasis,
        isometry=isometry,
    )


def build_sections(k: int, geometry: Optional[QuantizedGeometry] = None) -> SectionSpace:
    """
    Build H0(P1, O(k)) with its quadrature Gram matrix, checked against the closed form.

    Raises `GramMismatch` when the two disagree beyond 1e-10 relative, and
    `InsufficientQuadrature` when the rule is not exact to degree `2 k + 2`.

    Example:
        ```python
        import math
        from toeplitz_lattice.quantization.sections import build_sections

        space = build_sections(4)
        assert space.dim == 5
        assert math.isclose(space.closed_form[2], math.pi / 30)
        ```
    """
    if geometry is None:
        geometry = QuantizedGeometry(k)
    elif geometry.k != k:
        raise InvalidQuantumNumber(f"Geometry was built for k={geometry.k}, not k={k}")
    return _build_sections(geometry)


@dataclass(frozen=True, eq=False)
class HardySpace:
    """
    The truncation of the Hardy space H(X) to the finite direct sum of H0(P1, O(k)),
    `k_min <= k <= k_max`. Every "full space" statement is relative to this truncation.
    """

    k_max: int
    k_min: int = 0
    volume_normalization: float = DEFAULT_VOLUME

    def __post_init__(self):
        if self.k_min < 0 or self.k_max < self.k_min:
            raise InconsistentTruncation(self.k_min, self.k_max)

    @cached_property
    def sections(self) -> tuple[SectionSpace, ...]:
        return tuple(
            build_sections(k, QuantizedGeometry(k, self.volume_normalization))
            for k in range(self.k_min, self.k_max + 1)
        )

    @cached_property
    def offsets(self) -> dict[int, int]:
        offsets: dict[int, int] = {}
        position = 0
        for space in self.sections:
            offsets[space.k] = position
            position += space.dim
        return offsets

    @property
    def dim(self) -> int:
        return sum(space.dim for space in self.sections)

    @cached_property
    def ambient(self) -> HilbertSpace:
        return HilbertSpace(self.dim, f"H(X) for {self.k_min} <= k <= {self.k_max}")

    def section_space(self, k: int) -> SectionSpace:
        if k not in self.offsets:
            raise InvalidQuantumNumber(f"k={k} is outside the truncation [{self.k_min}, {self.k_max}]")
        return self.sections[k - self.k_min]

    def block(self, k: int) -> slice:
        start = self.offsets[k] if k in self.offsets else -1
        if start < 0:
            raise InvalidQuantumNumber(f"k={k} is outside the truncation [{self.k_min}, {self.k_max}]")
        return slice(start, start + k + 1)

    def embed(self, k: int, vector: np.ndarray) -> np.ndarray:
        """Place a vector of H0(P1, O(k)) into the direct sum."""
        vector = np.asarray(vector, dtype=complex)
        if vector.shape != (k + 1,):
            raise DimensionMismatch(k + 1, vector.size)
        result = np.zeros(self.dim, dtype=complex)
        result[self.block(k)] = vector
        return result


SpaceLike = Union[SectionSpace, HardySpace]


def coherent_vector(point: Any, space: SectionSpace) -> np.ndarray:
    """
    The coherent vector e_alpha in orthonormal coordinates.

    It reproduces evaluation at the representative: `<s, e_alpha> = s(alpha)` for every section
    `s`, where `<u, v> = sum_j u_j conj(v_j)`. Rescaling alpha by c rescales e_alpha by conj(c)^k.

    Example:
        ```python
        import numpy as np
        from toeplitz_lattice.quantization.sections import build_sections, coherent_vector

        space = build_sections(3)
        e = coherent_vector([1, 0], space)
        assert np.count_nonzero(np.abs(e) > 1e-12) == 1 and abs(e[3]) > 0
        ```
    """
    alpha = as_points(point)
    if alpha.shape[0] != 1:
        raise ValueError("coherent_vector takes a single homogeneous pair")
    return np.conj(space.evaluate_orthonormal(alpha)[0])


def berezin_symbol(operator: Operator, point: Any, space: SectionSpace) -> complex:
    """
    Covariant Berezin symbol <A e, e> / <e, e> at the point, e the coherent vector.

    The value does not depend on the representative of the point.
    """
    if operator.ambient.dim != space.dim:
        raise DimensionMismatch(space.dim, operator.ambient.dim, "operator")
    e = coherent_vector(unit_lift(point), space)
    return complex(np.vdot(e, operator.matrix @ e) / np.vdot(e, e))


def berezin_symbols(operator: Operator, points: Any, space: SectionSpace) -> np.ndarray:
    """Vectorized `berezin_symbol` over an `(n, 2)` array of points."""
    if operator.ambient.dim != space.dim:
        raise DimensionMismatch(space.dim, operator.ambient.dim, "operator")
    coherent = np.conj(space.evaluate_orthonormal(unit_lift(points)))
    numerator = np.einsum("na,ab,nb->n", coherent.conj(), operator.matrix, coherent)
    return numerator / np.sum(np.abs(coherent) ** 2, axis=1)

"""
Berezin-Toeplitz operators on H0(P1, O(k)).

`T_k[f] = Pi_k M_f Pi_k` is computed in the orthonormal monomial basis as `W^H diag(w f) W`, where
W holds the orthonormal sections at the quadrature nodes and w the quadrature weights. The
product of f with two sections of degree k is a polynomial of degree `k + deg(f)` in the height
(times azimuthal characters), so a band-limited symbol is compressed exactly as soon as the rule
is exact to that degree.

Symbols are functions of the height `h` and the azimuth `phi`, which is how every symbol of the
package is written.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Optional, Sequence

import numpy as np
import scipy.special

from toeplitz_lattice.exception import BaseToeplitzLatticeException
from toeplitz_lattice.quantization.decomposition import EquivariantComponent
from toeplitz_lattice.quantization.geometry import (
    InvalidQuantumNumber,
    QuadratureNodes,
    QuadratureSpec,
    QuadratureWarning,
    QuantizedGeometry,
    sphere_coordinates,
)
from toeplitz_lattice.quantization.sections import HardySpace, SectionSpace, build_sections
from toeplitz_lattice.subspace import DimensionMismatch, HilbertSpace, Operator

logger = logging.getLogger(__name__)

SymbolFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]

FD_STEP = 5e-3
FD_TOL = 1e-5


class NonSmoothSymbol(BaseToeplitzLatticeException):
    def __init__(self, name: str, gap: float):
        super().__init__(
            f"Symbol {name!r} is not smooth enough for a finite-difference Laplacian: "
            f"successive Richardson estimates differ by {gap:.3e}"
        )


@dataclass(frozen=True, eq=False)
class Symbol:
    """
    A function on P1 written in height/azimuth coordinates.

    params:
        name:
            Identifier used in reports (`symbol_id`).
        func:
            Vectorized callable `(heights, phis) -> values`.
        laplacian:
            Optional exact Laplace-Beltrami operator of `func` on the unit round sphere.
        degree:
            Band limit: the symbol is a polynomial of this degree in the embedding coordinates.
            None when unknown or infinite.
        real:
            Whether the symbol is real valued.
    """

    name: str
    func: SymbolFunction
    laplacian: Optional[SymbolFunction] = None
    degree: Optional[int] = None
    real: bool = True

    def __call__(self, heights: Any, phis: Any) -> np.ndarray:
        h, p = np.broadcast_arrays(np.asarray(heights, dtype=float), np.asarray(phis, dtype=float))
        values = np.asarray(self.func(h, p))
        if values.shape != h.shape:
            values = np.broadcast_to(values, h.shape)
        return values.astype(float if self.real else complex)

    def at(self, points: Any) -> np.ndarray:
        """Values at homogeneous points."""
        return self(*sphere_coordinates(points))

    @classmethod
    def combine(cls, terms: Sequence[tuple[complex, Symbol]], name: Optional[str] = None) -> Symbol:
        """Linear combination `sum c_i f_i`, keeping the Laplacian and band limit when all terms have them."""
        terms = list(terms)

        def func(h: np.ndarray, p: np.ndarray) -> np.ndarray:
            return sum(c * s(h, p) for c, s in terms)

        laplacian: Optional[SymbolFunction] = None
        if all(s.laplacian is not None for _, s in terms):

            def laplacian(h: np.ndarray, p: np.ndarray) -> np.ndarray:
                return sum(c * s.laplacian(h, p) for c, s in terms)  # type: ignore[misc]

        degrees = [s.degree for _, s in terms]
        degree = None if any(d is None for d in degrees) else max(degrees, default=0)  # type: ignore[type-var]
        real = all(s.real and complex(c).imag == 0 for c, s in terms)
        if name is None:
            name = " + ".join(f"{complex(c).real:g}*{s.name}" for c, s in terms)
        return cls(name, func, laplacian, degree, real)

    def __add__(self, other: Symbol) -> Symbol:
        return Symbol.combine([(1.0, self), (1.0, other)], f"({self.name} + {other.name})")

    def scaled(self, factor: float) -> Symbol:
        return Symbol.combine([(factor, self)], f"{factor:g}*{self.name}")


def constant(value: float = 1.0) -> Symbol:
    return Symbol(
        f"const({value:g})",
        lambda h, p: np.full(np.shape(h), value, dtype=float),
        laplacian=lambda h, p: np.zeros(np.shape(h)),
        degree=0,
    )


def height() -> Symbol:
    """The torus moment map h = cos(theta), an eigenfunction of the Laplacian with eigenvalue -2."""
    return Symbol("height", lambda h, p: h, laplacian=lambda h, p: -2 * h, degree=1)


def real_spherical_harmonic(l: int, m: int) -> Symbol:
    """
    Real spherical harmonic Y_lm, orthonormal for the area measure of the unit sphere.

    Example:
        ```python
        import numpy as np
        from toeplitz_lattice.quantization.toeplitz import real_spherical_harmonic

        y10 = real_spherical_harmonic(1, 0)
        assert np.isclose(y10(1.0, 0.0), np.sqrt(3 / (4 * np.pi)))
        ```
    """
    if l < 0 or abs(m) > l:
        raise InvalidQuantumNumber(f"Spherical harmonic needs |m| <= l, got l={l}, m={m}")
    order = abs(m)
    norm = np.sqrt((2 * l + 1) / (4 * np.pi))
    norm *= np.exp(0.5 * (scipy.special.gammaln(l - order + 1) - scipy.special.gammaln(l + order + 1)))
    if m:
        norm *= np.sqrt(2)

    def func(h: np.ndarray, p: np.ndarray) -> np.ndarray:
        legendre = scipy.special.lpmv(order, l, np.clip(h, -1.0, 1.0))
        if m > 0:
            return norm * legendre * np.cos(order * p)
        if m < 0:
            return norm * legendre * np.sin(order * p)
        return norm * legendre

    return Symbol(
        f"Y({l},{m})",
        func,
        laplacian=lambda h, p: -l * (l + 1) * func(h, p),
        degree=l,
    )


def harmonic_series(coefficients: Mapping[tuple[int, int], float], name: Optional[str] = None) -> Symbol:
    """Finite real combination of spherical harmonics, keyed by (l, m)."""
    terms = [(c, real_spherical_harmonic(l, m)) for (l, m), c in sorted(coefficients.items())]
    return Symbol.combine(terms, name or f"series({len(terms)} terms)")


def indicator_band(lower: float, upper: float) -> Symbol:
    """Indicator of the latitude band lower <= h <= upper. Not band limited, not smooth."""
    return Symbol(
        f"band[{lower:g},{upper:g}]",
        lambda h, p: ((h >= lower) & (h <= upper)).astype(float),
    )


@dataclass(frozen=True, eq=False)
class ToeplitzOperator(Operator):
    """`T_k[f]` together with its provenance."""

    symbol_id: str
    k: int
    quadrature: QuadratureSpec

    def to_dict(self) -> dict[str, Any]:
        return {
            **super().to_dict(),
            "symbol": self.symbol_id,
            "k": self.k,
            "quadrature_degree": self.quadrature.exactness_degree,
        }


def compress(space: SectionSpace, nodes: QuadratureNodes, values: np.ndarray) -> np.ndarray:
    """Matrix of `s -> Pi_k(f s)` in orthonormal coordinates, given f at the quadrature nodes."""
    sections = space.evaluate_orthonormal(nodes.points)
    return (sections.conj().T * (nodes.weights * values)) @ sections


def toeplitz(symbol: Symbol, k: int, geometry: Optional[QuantizedGeometry] = None) -> ToeplitzOperator:
    """
    The Berezin-Toeplitz operator T_k[f] on H0(P1, O(k)).

    Hermitian for real f, and `T_k[1]` is the identity. A `QuadratureWarning` is emitted when the
    symbol is not known to be integrated exactly by the rule.

    Example:
        ```python
        import numpy as np
        from toeplitz_lattice.quantization.toeplitz import height, toeplitz

        t = toeplitz(height(), 2)
        assert np.allclose(np.linalg.eigvalsh(t.matrix), [-0.5, 0.0, 0.5])
        ```
    """
    space = build_sections(k, geometry)
    rule = space.geometry.rule
    if symbol.degree is None or k + symbol.degree > rule.exactness_degree:
        warnings.warn(
            f"Symbol {symbol.name!r} (degree {symbol.degree}) is not integrated exactly by a rule "
            f"of degree {rule.exactness_degree} at k={k}",
            QuadratureWarning,
            stacklevel=2,
        )
    nodes = rule.nodes(space.volume)
    matrix = compress(space, nodes, symbol(nodes.heights, nodes.phis))
    if symbol.real:
        matrix = (matrix + matrix.conj().T) / 2
    return ToeplitzOperator(space.ambient, matrix, symbol.name, k, rule)


def equivariant_toeplitz(
    symbol: Symbol,
    component: EquivariantComponent,
    geometry: Optional[QuantizedGeometry] = None,
    hardy: Optional[HardySpace] = None,
) -> Operator:
    """
    Compression of `T_k[f]` to an isotype, `B^H T_k[f] B` with B the component basis.

    Components of a `HardySpace` decomposition need `hardy` to locate their block.
    """
    k = component.nu_t
    if component.dim == 0:
        raise DimensionMismatch(1, 0, f"isotype {component.labels}")
    basis = component.subspace.basis
    if basis.shape[0] != k + 1:
        if hardy is None:
            raise DimensionMismatch(k + 1, basis.shape[0], "component basis")
        basis = basis[hardy.block(k)]
    operator = toeplitz(symbol, k, geometry)
    compressed = basis.conj().T @ operator.matrix @ basis
    return Operator(HilbertSpace(component.dim, f"isotype {component.labels}"), compressed)


def _finite_difference_laplacian(
    symbol: Symbol, heights: np.ndarray, phis: np.ndarray, step: float, tol: float
) -> np.ndarray:
    # Euclidean Laplacian of the degree 0 extension x -> f(x/|x|) at |x| = 1
    h = np.asarray(heights, dtype=float).reshape(-1)
    p = np.broadcast_to(np.asarray(phis, dtype=float).reshape(-1), h.shape)
    s = np.sqrt(np.clip(1 - h**2, 0.0, None))
    base = np.column_stack([s * np.cos(p), s * np.sin(p), h])

    def extension(xyz: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(xyz, axis=1)
        return symbol(np.clip(xyz[:, 2] / r, -1.0, 1.0), np.arctan2(xyz[:, 1], xyz[:, 0]))

    center = extension(base)

    def second_difference(delta: float) -> np.ndarray:
        total = -6 * center
        for axis in range(3):
            shift = np.zeros(3)
            shift[axis] = delta
            total = total + extension(base + shift) + extension(base - shift)
        return total / delta**2

    coarse, middle, fine = (second_difference(step / 2**j) for j in range(3))
    first = (4 * middle - coarse) / 3
    second = (4 * fine - middle) / 3
    gap = np.abs(first - second)
    if gap.size and np.any(gap > tol * (1 + np.abs(second))):
        raise NonSmoothSymbol(symbol.name, float(np.max(gap)))
    return second


def laplace_beltrami(
    symbol: Symbol, radius: float = 1.0, step: float = FD_STEP, tol: float = FD_TOL
) -> Symbol:
    """
    Laplace-Beltrami operator of the round sphere of radius `radius` (non-positive convention).

    Uses the exact Laplacian when the symbol carries one, central differences with Richardson
    extrapolation otherwise. `NonSmoothSymbol` is raised at evaluation time when the
    extrapolation does not settle.
    """
    scale = 1 / radius**2
    name = f"lap({symbol.name})"
    if symbol.laplacian is not None:
        exact = symbol.laplacian
        return Symbol(name, lambda h, p: scale * exact(h, p), degree=symbol.degree, real=symbol.real)
    return Symbol(
        name,
        lambda h, p: scale * _finite_difference_laplacian(symbol, h, p, step, tol).reshape(np.shape(h)),
        degree=symbol.degree,
        real=symbol.real,
    )


def tuynman_q(symbol: Symbol, k: int, geometry: Optional[QuantizedGeometry] = None) -> Operator:
    """
    `Q_k[f] = i T_k[f - Delta f / (2 k)]`.

    The factor i makes Q_k[f] anti-Hermitian for real f; `tuynman_deviation` compares
    `Q_k[f] / i` with `T_k[f]`.
    """
    if k == 0:
        raise InvalidQuantumNumber("Q_k[f] contains 1/(2k) and is undefined at k=0")
    geometry = geometry or QuantizedGeometry(k)
    lap = laplace_beltrami(symbol, geometry.sphere_radius)
    corrected = Symbol.combine([(1.0, symbol), (-1 / (2 * k), lap)], f"{symbol.name} - lap/2k")
    operator = toeplitz(corrected, k, geometry)
    return Operator(operator.ambient, 1j * operator.matrix)


def tuynman_deviation(symbol: Symbol, k: int, geometry: Optional[QuantizedGeometry] = None) -> float:
    """
    Operator norm of `Q_k[f] / i - T_k[f]`, which is at most sup|Delta f| / (2 k).

    Example:
        ```python
        from toeplitz_lattice.quantization.toeplitz import height, tuynman_deviation

        assert abs(tuynman_deviation(height(), 10) - 1 / 12) < 1e-12
        ```
    """
    geometry = geometry or QuantizedGeometry(k)
    q = tuynman_q(symbol, k, geometry)
    t = toeplitz(symbol, k, geometry)
    return float(np.linalg.norm(q.matrix / 1j - t.matrix, 2))

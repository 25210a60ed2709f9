"""
Geometry of M = P1: homogeneous points, the Fubini-Study measure and its quadrature, and the three
Hamiltonian group actions (circle, torus, SU(2)) with their moment maps.

Points are homogeneous pairs `(z0, z1) != 0`. Every output of the package is independent of the
representative of a point, except where a scaling law is stated (coherent vectors).

The Fubini-Study measure pushed forward to the height `h = (|z0|^2 - |z1|^2) / (|z0|^2 + |z1|^2)`
is uniform on [-1, 1], and uniform in the azimuth `phi = arg(z1 / z0)`. Integrals over P1 are
therefore computed with Gauss-Legendre nodes in `h` times an equispaced azimuthal grid.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Literal, Optional, Union

import numpy as np
from typing_extensions import assert_never

from toeplitz_lattice.exception import BaseToeplitzLatticeException

logger = logging.getLogger(__name__)

DEFAULT_VOLUME = math.pi
"""Total Fubini-Study volume of P1 for the unit-radius convention."""


class ZeroPoint(BaseToeplitzLatticeException):
    def __init__(self):
        super().__init__("(0, 0) is not a point of P1, homogeneous coordinates must not both vanish.")


class InsufficientQuadrature(BaseToeplitzLatticeException):
    def __init__(self, required: int, available: int, what: str):
        super().__init__(
            f"{what} needs quadrature exactness degree >= {required}, "
            f"the rule is only exact to degree {available}."
        )


class InvalidQuantumNumber(BaseToeplitzLatticeException):
    pass


class QuadratureWarning(UserWarning):
    """Raised (as a warning) when an integrand is not known to be integrated exactly."""


PointLike = Union[np.ndarray, tuple[complex, complex], list[complex]]


def as_points(points: Any) -> np.ndarray:
    """Return an `(n, 2)` complex array of homogeneous pairs, rejecting (0, 0)."""
    array = np.asarray(points, dtype=complex)
    if array.ndim == 1:
        array = array.reshape(1, 2)
    if array.ndim != 2 or array.shape[1] != 2:
        raise ValueError(f"Expected homogeneous pairs of shape (n, 2), got {array.shape}")
    norms = np.abs(array[:, 0]) ** 2 + np.abs(array[:, 1]) ** 2
    if np.any(norms == 0):
        raise ZeroPoint()
    return array


def unit_lift(points: Any) -> np.ndarray:
    """Rescale every pair to unit norm |z0|^2 + |z1|^2 = 1 (a point of the circle bundle)."""
    array = as_points(points)
    return array / np.sqrt(np.abs(array[:, 0]) ** 2 + np.abs(array[:, 1]) ** 2)[:, None]


def points_from_sphere(heights: Any, phis: Any) -> np.ndarray:
    """Unit lifts `(cos(theta/2), sin(theta/2) e^{i phi})` of the points with height `cos(theta)`."""
    h = np.clip(np.asarray(heights, dtype=float).reshape(-1), -1.0, 1.0)
    phi = np.asarray(phis, dtype=float).reshape(-1)
    z0 = np.sqrt((1 + h) / 2)
    z1 = np.sqrt((1 - h) / 2) * np.exp(1j * phi)
    return np.column_stack([z0.astype(complex), z1])


def sphere_coordinates(points: Any) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of `points_from_sphere`: return (height, azimuth) of each point."""
    lift = unit_lift(points)
    h = np.abs(lift[:, 0]) ** 2 - np.abs(lift[:, 1]) ** 2
    phi = np.angle(lift[:, 1] * np.conj(lift[:, 0]))
    return h, phi


@lru_cache(maxsize=64)
def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@dataclass(frozen=True)
class QuadratureNodes:
    """Flattened product rule: heights, azimuths and weights summing to the measured volume."""

    heights: np.ndarray
    phis: np.ndarray
    weights: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return points_from_sphere(self.heights, self.phis)

    def integrate(self, values: np.ndarray) -> complex:
        return complex(np.sum(self.weights * values))


@dataclass(frozen=True)
class QuadratureSpec:
    """
    Product quadrature on P1: Gauss-Legendre in the height, equispaced in the azimuth.

    With `exactness_degree = D` the rule integrates exactly every `h^j e^{i m phi}` with `j <= D`
    and `|m| <= D`.

    params:
        scheme:
            Only `"gauss-latitude-uniform-longitude"` is implemented.
        n_latitude:
            Gauss nodes in the height variable, exact for polynomials of degree `2 n - 1`.
        n_longitude:
            Equispaced azimuthal nodes, exact for `e^{i m phi}` with `|m| < n_longitude`.
        exactness_degree:
            The stated exactness, checked by `verify`.

    Example:
        ```python
        from toeplitz_lattice.quantization.geometry import QuadratureSpec

        spec = QuadratureSpec.for_degree(12)
        spec.verify()
        assert spec.n_latitude == 7 and spec.n_longitude == 13
        ```
    """

    scheme: Literal["gauss-latitude-uniform-longitude"] = "gauss-latitude-uniform-longitude"
    n_latitude: int = 3
    n_longitude: int = 5
    exactness_degree: int = 4

    def __post_init__(self):
        if self.n_latitude < 1 or self.n_longitude < 1 or self.exactness_degree < 0:
            raise InsufficientQuadrature(0, -1, "A quadrature rule")
        if 2 * self.n_latitude - 1 < self.exactness_degree:
            raise InsufficientQuadrature(
                self.exactness_degree, 2 * self.n_latitude - 1, "The stated latitude rule"
            )
        if self.n_longitude <= self.exactness_degree:
            raise InsufficientQuadrature(
                self.exactness_degree, self.n_longitude - 1, "The stated longitude rule"
            )

    @classmethod
    def for_degree(cls, degree: int) -> QuadratureSpec:
        degree = max(int(degree), 0)
        return cls(
            n_latitude=degree // 2 + 1,
            n_longitude=degree + 1,
            exactness_degree=degree,
        )

    def nodes(
        self, volume: float = DEFAULT_VOLUME, band: tuple[float, float] = (-1.0, 1.0)
    ) -> QuadratureNodes:
        """
        Nodes and weights for the Fubini-Study measure of total mass `volume`, restricted to the
        latitude band `band` (heights between the two bounds).

        The Gauss panel is mapped onto the band itself, so an indicator of the band times a
        polynomial of degree at most `exactness_degree` is integrated exactly.
        """
        if self.scheme == "gauss-latitude-uniform-longitude":
            lo, hi = band
            x, w = _gauss_legendre(self.n_latitude)
            heights = (hi - lo) / 2 * x + (hi + lo) / 2
            lat_weights = w * (hi - lo) / 2
            phis = 2 * np.pi * np.arange(self.n_longitude) / self.n_longitude
            hh, pp = np.meshgrid(heights, phis, indexing="ij")
            weights = np.outer(lat_weights, np.full(self.n_longitude, 1 / self.n_longitude))
            # dV = volume * (dh / 2) * (dphi / 2 pi)
            weights = weights * volume / 2
            return QuadratureNodes(hh.reshape(-1), pp.reshape(-1), weights.reshape(-1))
        else:
            assert_never(self.scheme)

    def verify(self, atol: float = 1e-12):
        """Check the stated exactness against the monomial integrals h^j and e^{i m phi}."""
        x, w = _gauss_legendre(self.n_latitude)
        for j in range(self.exactness_degree + 1):
            exact = 0.0 if j % 2 else 2.0 / (j + 1)
            if abs(float(np.sum(w * x**j)) - exact) > atol:
                raise InsufficientQuadrature(j, j - 1, "Height monomial integration")
        phis = 2 * np.pi * np.arange(self.n_longitude) / self.n_longitude
        for m in range(1, self.exactness_degree + 1):
            if abs(np.mean(np.exp(1j * m * phis))) > atol:
                raise InsufficientQuadrature(m, m - 1, "Azimuthal integration")


@dataclass(frozen=True)
class QuantizedGeometry:
    """
    Data of the quantization of P1 at tensor power `k` (k = 1/hbar).

    params:
        k:
            Tensor power of the hyperplane bundle, k >= 0.
        volume_normalization:
            Total volume assigned to P1; every closed form carries it explicitly.
        quadrature:
            Quadrature rule, exact to degree at least `2 k + 2`. Defaults to degree `2 k + 4`.
        sphere_radius:
            Radius of the round metric the Laplace-Beltrami operator refers to.
    """

    k: int
    volume_normalization: float = DEFAULT_VOLUME
    quadrature: Optional[QuadratureSpec] = field(default=None)
    sphere_radius: float = 1.0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise InvalidQuantumNumber(f"Tensor power k must be a nonnegative integer, got {self.k!r}")
        if self.volume_normalization <= 0:
            raise InvalidQuantumNumber(
                f"volume_normalization must be positive, got {self.volume_normalization}"
            )
        if self.sphere_radius <= 0:
            raise InvalidQuantumNumber(f"sphere_radius must be positive, got {self.sphere_radius}")
        if self.quadrature is None:
            object.__setattr__(self, "quadrature", QuadratureSpec.for_degree(2 * self.k + 4))
        assert self.quadrature is not None
        if self.quadrature.exactness_degree < 2 * self.k + 2:
            raise InsufficientQuadrature(
                2 * self.k + 2, self.quadrature.exactness_degree, f"The k={self.k} geometry"
            )

    @property
    def rule(self) -> QuadratureSpec:
        assert self.quadrature is not None
        return self.quadrature

    def with_k(self, k: int) -> QuantizedGeometry:
        """
        Same conventions at another tensor power.

        A custom rule is kept while it is still exact enough for `k`; the default rule is
        replaced by the default of the new power.
        """
        rule = self.rule
        custom = rule != QuadratureSpec.for_degree(2 * self.k + 4)
        keep = custom and rule.exactness_degree >= 2 * k + 2
        return QuantizedGeometry(k, self.volume_normalization, rule if keep else None, self.sphere_radius)


ActionKind = Literal["circle", "torus", "su2"]


@dataclass(frozen=True)
class GroupAction:
    """
    One of the three Hamiltonian actions on P1.

    - `circle`: t (z0, z1) = (t z0, t z1), moment map identically 1;
    - `torus`: t (z0, z1) = (t z0, t^-1 z1), moment map the height;
    - `su2`: the linear action of SU(2), moment map the inclusion of the sphere of radius
      `radius` (a positive half-integer) into R^3.
    """

    kind: ActionKind
    radius: float = 0.5

    def __post_init__(self):
        if self.kind not in ("circle", "torus", "su2"):
            raise InvalidQuantumNumber(f"Unknown action kind {self.kind!r}")
        twice = Fraction(self.radius).limit_denominator(1000) * 2
        if self.radius <= 0 or twice.denominator != 1:
            raise InvalidQuantumNumber(
                f"The su2 radius must be a positive half-integer, got {self.radius}"
            )

    @classmethod
    def circle(cls) -> GroupAction:
        return cls("circle")

    @classmethod
    def torus(cls) -> GroupAction:
        return cls("torus")

    @classmethod
    def su2(cls, radius: float = 0.5) -> GroupAction:
        return cls("su2", radius)

    def moment_map(self, points: Any) -> np.ndarray:
        return moment_map(self, points)


def moment_map(action: GroupAction, points: Any) -> np.ndarray:
    """
    Evaluate the moment map of `action` at homogeneous points.

    Returns shape `(n,)` for the circle and the torus, `(n, 3)` for su2.

    Example:
        ```python
        import numpy as np
        from toeplitz_lattice.quantization.geometry import GroupAction, moment_map

        assert np.allclose(moment_map(GroupAction.torus(), [1, 0]), [1.0])
        assert np.allclose(moment_map(GroupAction.su2(), [1, 0]), [[0, 0, 0.5]])
        ```
    """
    lift = unit_lift(points)
    z0, z1 = lift[:, 0], lift[:, 1]
    if action.kind == "circle":
        return np.ones(len(lift))
    elif action.kind == "torus":
        return np.abs(z0) ** 2 - np.abs(z1) ** 2
    elif action.kind == "su2":
        cross = np.conj(z0) * z1
        unit = np.column_stack([2 * cross.real, 2 * cross.imag, np.abs(z0) ** 2 - np.abs(z1) ** 2])
        return action.radius * unit
    else:
        assert_never(action.kind)

"""
The Toeplitz POVM of a partition of P1 into latitude bands.

For a region U the effect is `T_k[1_U]`. Bands `lo <= h <= hi` are integrated exactly by mapping
the Gauss panel onto the band, so the effects of a partition sum to the identity to rounding.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np

from toeplitz_lattice.exception import BaseToeplitzLatticeException
from toeplitz_lattice.quantization.geometry import QuantizedGeometry, points_from_sphere
from toeplitz_lattice.quantization.sections import build_sections
from toeplitz_lattice.quantization.toeplitz import Symbol, compress
from toeplitz_lattice.subspace import Operator

logger = logging.getLogger(__name__)

COMPLETENESS_TOL = 1e-9
EDGE_TOL = 1e-12


class InvalidPartition(BaseToeplitzLatticeException):
    pass


class OverlappingRegions(InvalidPartition):
    def __init__(self, edges: Sequence[float]):
        super().__init__(f"Band edges must be strictly increasing, got {list(edges)}")


class MissingSamplePoints(InvalidPartition):
    def __init__(self):
        super().__init__("Riemann reconstruction needs one sample point per region")


@dataclass(frozen=True)
class RegionPartition:
    """
    A partition of P1 into latitude bands `edges[i] <= h <= edges[i+1]`.

    params:
        edges:
            Strictly increasing heights from -1 to 1.
        samples:
            One sample height per band, at azimuth 0. Optional, needed for reconstruction.

    Example:
        ```python
        from toeplitz_lattice.quantization.povm import RegionPartition

        partition = RegionPartition.uniform(4)
        assert partition.bands[0] == (-1.0, -0.5)
        assert partition.refine().size == 8
        ```
    """

    edges: tuple[float, ...]
    samples: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        edges = tuple(float(e) for e in self.edges)
        if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
            raise OverlappingRegions(edges)
        if abs(edges[0] + 1) > EDGE_TOL or abs(edges[-1] - 1) > EDGE_TOL:
            raise InvalidPartition(f"Bands must cover [-1, 1], got [{edges[0]}, {edges[-1]}]")
        object.__setattr__(self, "edges", (-1.0, *edges[1:-1], 1.0))
        if self.samples is not None:
            samples = tuple(float(s) for s in self.samples)
            if len(samples) != len(edges) - 1:
                raise MissingSamplePoints()
            for (lo, hi), s in zip(self.bands, samples):
                if not lo <= s <= hi:
                    raise InvalidPartition(f"Sample height {s} is outside its band [{lo}, {hi}]")
            object.__setattr__(self, "samples", samples)

    @classmethod
    def from_edges(cls, edges: Sequence[float], midpoints: bool = True) -> RegionPartition:
        edges = tuple(edges)
        samples = tuple((a + b) / 2 for a, b in zip(edges, edges[1:])) if midpoints else None
        return cls(edges, samples)

    @classmethod
    def uniform(cls, n: int) -> RegionPartition:
        """n bands of equal measure (equal height) with midpoint samples."""
        if n < 1:
            raise InvalidPartition(f"A partition needs at least one band, got {n}")
        return cls.from_edges(np.linspace(-1.0, 1.0, n + 1).tolist())

    @classmethod
    def hemispheres(cls) -> RegionPartition:
        return cls.from_edges((-1.0, 0.0, 1.0))

    @classmethod
    def cap(cls, fraction: float) -> RegionPartition:
        """The polar cap {h >= 1 - 2 fraction} of measure fraction, and its complement."""
        if not 0 < fraction < 1:
            raise InvalidPartition(f"Cap fraction must be in (0, 1), got {fraction}")
        return cls.from_edges((-1.0, 1 - 2 * fraction, 1.0))

    @property
    def size(self) -> int:
        return len(self.edges) - 1

    @property
    def bands(self) -> list[tuple[float, float]]:
        return list(zip(self.edges, self.edges[1:]))

    def measure_fractions(self) -> np.ndarray:
        """Fubini-Study measure of each band, as a fraction of the total."""
        return np.diff(self.edges) / 2

    def sample_points(self) -> np.ndarray:
        if self.samples is None:
            raise MissingSamplePoints()
        return points_from_sphere(self.samples, np.zeros(self.size))

    def refine(self) -> RegionPartition:
        """Split every band in two at its midpoint."""
        edges = [self.edges[0]]
        for lo, hi in self.bands:
            edges.extend([(lo + hi) / 2, hi])
        return RegionPartition.from_edges(edges)


def povm_blocks(
    partition: RegionPartition, k: int, geometry: Optional[QuantizedGeometry] = None
) -> list[Operator]:
    """
    The effects `T_k[1_U]` of every band, positive semi-definite and summing to the identity.

    Example:
        ```python
        from toeplitz_lattice.quantization.povm import RegionPartition, povm_blocks, povm_completeness

        blocks = povm_blocks(RegionPartition.uniform(3), 5)
        assert povm_completeness(blocks) < 1e-9
        ```
    """
    space = build_sections(k, geometry)
    rule = space.geometry.rule
    blocks = []
    for band in partition.bands:
        nodes = rule.nodes(space.volume, band)
        matrix = compress(space, nodes, np.ones_like(nodes.weights))
        blocks.append(Operator(space.ambient, (matrix + matrix.conj().T) / 2))
    completeness = povm_completeness(blocks)
    if completeness > COMPLETENESS_TOL:
        logger.warning("POVM at k=%d misses the identity by %.3e", k, completeness)
    else:
        logger.debug("POVM at k=%d: %d effects, completeness %.3e", k, len(blocks), completeness)
    return blocks


def povm_completeness(blocks: Sequence[Operator]) -> float:
    """Operator norm of `sum E_i - I`."""
    if not blocks:
        raise InvalidPartition("An empty POVM has no completeness")
    total = sum(b.matrix for b in blocks)
    return float(np.linalg.norm(total - np.eye(blocks[0].ambient.dim), 2))


def min_effect_eigenvalue(blocks: Sequence[Operator]) -> float:
    """Smallest eigenvalue over all effects; nonnegative up to rounding."""
    return float(min(np.linalg.eigvalsh(b.matrix)[0] for b in blocks))


def riemann_reconstruct(
    symbol: Symbol,
    partition: RegionPartition,
    k: int,
    geometry: Optional[QuantizedGeometry] = None,
    blocks: Optional[Sequence[Operator]] = None,
) -> Operator:
    """
    The Riemann sum `sum_i f(sample_i) E_i`, which tends to `T_k[f]` as the partition is refined.
    """
    if partition.samples is None:
        raise MissingSamplePoints()
    values = symbol(np.asarray(partition.samples), np.zeros(partition.size))
    blocks = list(blocks) if blocks is not None else povm_blocks(partition, k, geometry)
    matrix = sum(v * b.matrix for v, b in zip(values, blocks))
    return Operator(blocks[0].ambient, np.asarray(matrix))


def reconstruction_error(reconstruction: Operator, target: Operator) -> float:
    return float(np.linalg.norm(reconstruction.matrix - target.matrix, 2))


def describe_blocks(blocks: Sequence[Operator], partition: RegionPartition) -> list[dict[str, Any]]:
    """Per-effect summary rows: band, trace and extreme eigenvalues."""
    rows = []
    for (lo, hi), block in zip(partition.bands, blocks):
        eigenvalues = np.linalg.eigvalsh(block.matrix)
        rows.append(
            {
                "lower": lo,
                "upper": hi,
                "trace": float(np.trace(block.matrix).real),
                "min_eigenvalue": float(eigenvalues[0]),
                "max_eigenvalue": float(eigenvalues[-1]),
            }
        )
    return rows

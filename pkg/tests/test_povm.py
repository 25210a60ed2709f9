import numpy as np
import pytest
from numpy.testing import assert_allclose

from toeplitz_lattice.quantization.povm import (
    InvalidPartition,
    MissingSamplePoints,
    OverlappingRegions,
    RegionPartition,
    describe_blocks,
    min_effect_eigenvalue,
    povm_blocks,
    povm_completeness,
    reconstruction_error,
    riemann_reconstruct,
)
from toeplitz_lattice.quantization.toeplitz import height, real_spherical_harmonic, toeplitz


def test_partition_validation():
    with pytest.raises(OverlappingRegions):
        RegionPartition((-1.0, 0.5, 0.2, 1.0))
    with pytest.raises(InvalidPartition):
        RegionPartition((-1.0, 0.0, 0.9))
    with pytest.raises(InvalidPartition):
        RegionPartition((-1.0, 0.0, 1.0), samples=(0.5, 0.5))
    with pytest.raises(MissingSamplePoints):
        RegionPartition((-1.0, 0.0, 1.0), samples=(0.0,))
    with pytest.raises(InvalidPartition):
        RegionPartition.uniform(0)


def test_cap_and_hemispheres():
    assert_allclose(RegionPartition.cap(0.25).measure_fractions(), [0.75, 0.25])
    assert RegionPartition.hemispheres().bands == [(-1.0, 0.0), (0.0, 1.0)]


@pytest.mark.parametrize("k, bands", [(0, 3), (5, 4), (10, 10), (30, 7)])
def test_effects_form_a_povm(k: int, bands: int):
    blocks = povm_blocks(RegionPartition.uniform(bands), k)
    assert len(blocks) == bands
    assert min_effect_eigenvalue(blocks) >= -1e-10
    assert povm_completeness(blocks) <= 1e-9


def test_effect_traces_follow_measure():
    k = 10
    partition = RegionPartition.cap(0.3)
    rows = describe_blocks(povm_blocks(partition, k), partition)
    assert [r["trace"] for r in rows] == pytest.approx([0.7 * (k + 1), 0.3 * (k + 1)], abs=1e-9)
    assert all(0 <= r["min_eigenvalue"] <= r["max_eigenvalue"] <= 1 + 1e-12 for r in rows)


def test_single_band_is_the_identity():
    blocks = povm_blocks(RegionPartition.uniform(1), 6)
    assert_allclose(blocks[0].matrix, np.eye(7), atol=1e-12)


@pytest.mark.parametrize("symbol", [height(), real_spherical_harmonic(2, 0)], ids=["height", "Y20"])
def test_riemann_sums_converge_under_refinement(symbol):
    k = 10
    target = toeplitz(symbol, k)
    partition = RegionPartition.uniform(10)
    distances = []
    for _ in range(5):
        distances.append(reconstruction_error(riemann_reconstruct(symbol, partition, k), target))
        partition = partition.refine()
    assert all(b < a for a, b in zip(distances, distances[1:]))
    assert distances[-1] < 2e-2


def test_reconstruction_needs_samples():
    partition = RegionPartition.from_edges((-1.0, 0.0, 1.0), midpoints=False)
    with pytest.raises(MissingSamplePoints):
        riemann_reconstruct(height(), partition, 3)

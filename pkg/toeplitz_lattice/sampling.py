"""
Seeded random inputs for the randomized invariant checks.

Every helper takes an explicit `numpy.random.Generator`; nothing in the package draws from global
random state, so equal seeds give equal reports.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from scipy.stats import unitary_group

from toeplitz_lattice.quantization.toeplitz import Symbol, harmonic_series
from toeplitz_lattice.subspace import HilbertSpace, Subspace


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary matrix of size `dim`."""
    if dim == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1), dtype=complex)
    return np.asarray(unitary_group.rvs(dim, random_state=rng), dtype=complex)


def random_subspace(
    dim: int,
    rank: int,
    rng: np.random.Generator,
    ambient: Optional[HilbertSpace] = None,
) -> Subspace:
    ambient = ambient or HilbertSpace(dim)
    unitary = random_unitary(dim, rng)
    return Subspace(ambient, unitary[:, :rank])


def random_nested_pair(
    dim: int, rng: np.random.Generator, ambient: Optional[HilbertSpace] = None
) -> tuple[Subspace, Subspace]:
    """Return (X, Z) with X Haar-random of random rank and Z a Haar-random subspace built inside X."""
    ambient = ambient or HilbertSpace(dim)
    rank = int(rng.integers(0, dim + 1))
    x = random_subspace(dim, rank, rng, ambient)
    if rank == 0:
        return x, Subspace.zero(ambient)
    inner_rank = int(rng.integers(0, rank + 1))
    inner = random_unitary(rank, rng)[:, :inner_rank]
    return x, Subspace(ambient, x.basis @ inner)


def random_density_matrix(
    dim: int, rng: np.random.Generator, rank: Optional[int] = None
) -> np.ndarray:
    """Normalized complex Wishart matrix G G^H / Tr(G G^H), G of shape `(dim, rank)`."""
    rank = dim if rank is None else rank
    ginibre = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = ginibre @ ginibre.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_resolution(
    dim: int,
    rng: np.random.Generator,
    parts: Optional[int] = None,
    ambient: Optional[HilbertSpace] = None,
) -> list[Subspace]:
    """Split the columns of a Haar unitary into `parts` nonempty groups: an orthogonal resolution of identity."""
    ambient = ambient or HilbertSpace(dim)
    parts = int(rng.integers(1, dim + 1)) if parts is None else parts
    unitary = random_unitary(dim, rng)
    cuts = np.sort(rng.choice(np.arange(1, dim), size=parts - 1, replace=False)) if parts > 1 else []
    groups = np.split(np.arange(dim), cuts)
    return [Subspace(ambient, unitary[:, group]) for group in groups]


def random_sphere_samples(n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Heights and azimuths of `n` points uniform for the Fubini-Study measure."""
    return rng.uniform(-1.0, 1.0, n), rng.uniform(0.0, 2 * np.pi, n)


def random_rescaling(n: int, rng: np.random.Generator) -> np.ndarray:
    """Nonzero complex scale factors, used to check independence of the homogeneous representative."""
    modulus = rng.uniform(0.5, 2.0, n)
    return modulus * np.exp(2j * np.pi * rng.random(n))


def random_symbol(max_degree: int, rng: np.random.Generator) -> Symbol:
    """Real band-limited symbol: Gaussian coefficients on every Y_lm with l <= max_degree."""
    coefficients = {
        (l, m): float(rng.standard_normal())
        for l in range(max_degree + 1)
        for m in range(-l, l + 1)
    }
    return harmonic_series(coefficients, f"random(deg<={max_degree})")

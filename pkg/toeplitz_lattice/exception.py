class BaseToeplitzLatticeException(Exception):
    """Base exception for all exceptions raised by toeplitz_lattice."""

    pass

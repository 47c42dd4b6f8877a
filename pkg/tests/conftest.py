import numpy as np
import pytest

from qcoarse import DensityMatrix, RngStream


def random_density(dim: int, g: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Full-rank (or given-rank) random density via a Ginibre factor."""
    r = dim if rank is None else rank
    m = g.standard_normal((dim, r)) + 1j * g.standard_normal((dim, r))
    m = m @ m.conj().T
    return DensityMatrix.from_matrix(m / np.trace(m).real)


def random_hermitian(dim: int, g: np.random.Generator) -> np.ndarray:
    m = g.standard_normal((dim, dim)) + 1j * g.standard_normal((dim, dim))
    return 0.5 * (m + m.conj().T)


@pytest.fixture
def g():
    return RngStream(20260814).generator()

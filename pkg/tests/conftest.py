import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_orthonormal(rng, n_rows, n_cols):
    """Random basis with orthonormal columns (QR of a Gaussian matrix)."""
    mat = rng.standard_normal((n_rows, n_cols))
    q, _ = np.linalg.qr(mat)
    return q


class LinearModel:
    """Test model with rhs(q) = A q and a dense Jacobian."""

    def __init__(self, mat):
        self.mat = np.asarray(mat, dtype=np.float64)
        self.component_evals = 0

    def rhs(self, q):
        self.component_evals += self.mat.shape[0]
        return self.mat @ q

    def jacobian(self, q):
        return self.mat


class ZeroModel:
    """Test model with identically zero dynamics."""

    def __init__(self, n):
        self.n = n
        self.component_evals = 0

    def rhs(self, q):
        self.component_evals += self.n
        return np.zeros_like(q)

    def jacobian(self, q):
        return np.zeros((self.n, self.n))

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20260816)


def random_hermitian(m: int, rng: np.random.Generator) -> np.ndarray:
    A = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    return (A + A.conj().T) / 2.0


def random_kraus_channel(dim_in: int, dim_out: int, n_kraus: int,
                         rng: np.random.Generator) -> list[np.ndarray]:
    """A random CPTP map given by polar-normalized Kraus operators."""
    blocks = [rng.standard_normal((dim_out, dim_in))
              + 1j * rng.standard_normal((dim_out, dim_in))
              for _ in range(n_kraus)]
    S = sum(K.conj().T @ K for K in blocks)
    w, V = np.linalg.eigh(S)
    S_inv_sqrt = V @ np.diag(w ** -0.5) @ V.conj().T
    return [K @ S_inv_sqrt for K in blocks]

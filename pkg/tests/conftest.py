import numpy as np
import pytest

from lowrank.sampling import stream_rng


@pytest.fixture
def rng():
    return stream_rng(20260809)


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (g + g.conj().T) / 2


def random_rank_r(n: int, r: int, rng: np.random.Generator,
                  spectrum: str = "flat") -> np.ndarray:
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, _ = np.linalg.qr(g)
    U = q[:, :r]
    if spectrum == "flat":
        lam = np.full(r, 1.0)
    else:
        lam = rng.uniform(0.2, 1.0, size=r)
    lam = lam / np.linalg.norm(lam)
    return (U * lam) @ U.conj().T

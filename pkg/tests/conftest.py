import numpy as np
import pytest

from noisyrk import SpectrumSpec, generate_system


@pytest.fixture(scope="session")
def small_system():
    """40x20 full-column-rank consistent system, condition number 4."""
    spec = SpectrumSpec(m=40, n=20, r=20, sigma_min=1.0, sigma_max=4.0)
    return generate_system(spec, seed=7)


@pytest.fixture(scope="session")
def rank_deficient_system():
    """60x30 system with rank 20, so the minimal-norm solution matters."""
    spec = SpectrumSpec(m=60, n=30, r=20, sigma_min=2.0, sigma_max=10.0)
    return generate_system(spec, seed=19)


def make_matrix_with_rank(rng: np.random.Generator, m: int, n: int, r: int) -> np.ndarray:
    """Exact-rank-r matrix from a product of Gaussian factors."""
    return rng.standard_normal((m, r)) @ rng.standard_normal((r, n))

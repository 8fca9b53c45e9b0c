import numpy as np
import pytest

from idlhash import gene
from idlhash.hash_core import HashScheme, IdlConfig


@pytest.fixture(scope="session")
def genome_100k() -> bytes:
    return gene.random_genome(100_000, rng_seed=12)


@pytest.fixture(scope="session")
def genome_1m() -> bytes:
    return gene.random_genome(1_000_000, rng_seed=99)


@pytest.fixture()
def idl_cfg() -> IdlConfig:
    return IdlConfig(k=31, t=16, l=4096, m=2**22, eta=4, base_seed=7, scheme=HashScheme.IDL)


def make_cfg(scheme=HashScheme.IDL, k=31, t=16, l=4096, m=2**22, eta=4, seed=7) -> IdlConfig:
    return IdlConfig(k=k, t=t, l=l, m=m, eta=eta, base_seed=seed, scheme=scheme)


@pytest.fixture(scope="session")
def rng() -> np.random.Generator:
    return np.random.default_rng(2024)

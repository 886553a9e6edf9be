import numpy as np
import pytest

from ftcluster import lattice as lattice_mod
from ftcluster import noise as noise_mod
from ftcluster import oracle


@pytest.fixture(scope="session")
def rhg222():
    return lattice_mod.build_rhg((2, 2, 2))


@pytest.fixture(scope="session")
def xzzx222():
    return lattice_mod.build_xzzx((2, 2, 2))


@pytest.fixture(scope="session")
def rhg333():
    return lattice_mod.build_rhg((3, 3, 3))


@pytest.fixture(scope="session")
def xzzx333():
    return lattice_mod.build_xzzx((3, 3, 3))


@pytest.fixture(scope="session")
def small_lattices(rhg222, xzzx222):
    return {"rhg": rhg222, "xzzx": xzzx222}


@pytest.fixture(scope="session")
def tableaux(small_lattices):
    return {kind: oracle.prepare_cluster(lat) for kind, lat in small_lattices.items()}


@pytest.fixture(scope="session")
def circuit_z_params():
    return noise_mod.NoiseParams(model="circuit-z", base_rate=0.01, eta=100.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

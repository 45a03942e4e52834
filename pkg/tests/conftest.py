import json

import numpy as np
import pytest

from app.models.torus import PolarizedTorus, Semicharacter
from app.src import lattice


@pytest.fixture(scope="session")
def sq1():
    """Toro quadrado C/(Z + iZ) com H = [[1]]: E = [[0, −1], [1, 0]], |Pf| = 1."""
    return PolarizedTorus.from_data([[1.0], [1j]], [[1.0]])


@pytest.fixture(scope="session")
def d2():
    """Mesma rede com H = [[2]]: polarização de grau 2."""
    return PolarizedTorus.from_data([[1.0], [1j]], [[2.0]])


@pytest.fixture(scope="session")
def rect():
    return PolarizedTorus.from_data([[1.0], [2j]], [[1.0]])


@pytest.fixture(scope="session")
def skew():
    """C/(Z + τZ), τ = 0.3 + 1.2i, H = [[1/Im τ]]."""
    tau = 0.3 + 1.2j
    return PolarizedTorus.from_data([[1.0], [tau]], [[1.0 / tau.imag]])


@pytest.fixture(scope="session")
def sq2():
    """Produto de dois toros quadrados, n = 2."""
    basis = [[1.0, 0.0], [1j, 0.0], [0.0, 1.0], [0.0, 1j]]
    return PolarizedTorus.from_data(basis, np.eye(2))


@pytest.fixture(scope="session")
def chi0():
    return Semicharacter.trivial(2)


@pytest.fixture
def origin(sq1):
    return lattice.point_from_coords(sq1, (0.0, 0.0))


@pytest.fixture
def half_period(sq1):
    return lattice.point_from_coords(sq1, (0.5, 0.5))


@pytest.fixture
def sq1_config():
    return {
        "n": 1,
        "basis": [[1.0, 0.0], [0.0, 1.0]],
        "H": [[{"re": 1.0, "im": 0.0}]],
        "chi_phases": [0.0, 0.0],
        "k": 1,
    }


@pytest.fixture
def sq1_config_path(tmp_path, sq1_config):
    path = tmp_path / "sq1.json"
    path.write_text(json.dumps(sq1_config), encoding="utf-8")
    return path

import cmath
import itertools
import math

import pytest
from pydantic import ValidationError
from scipy.integrate import quad

from app.exceptions import InvalidOption
from app.schemas.cylinder import CylinderParams
from app.src import cylinder, lattice


def test_params_validation():
    with pytest.raises(ValidationError):
        CylinderParams(eta=0.0)
    with pytest.raises(ValidationError):
        CylinderParams(eta=1.0, alpha=1.0)
    assert CylinderParams(eta=1.0, alpha=0.75, k=3).m_k == pytest.approx(0.25)


# Normas
def test_norm_integral_base_case():
    params = CylinderParams(eta=1.0, alpha=0.0, k=1)
    assert cylinder.norm_integral_Ia(params, 0) == pytest.approx(2 * math.pi * math.sqrt(math.pi), rel=1e-12)
    assert cylinder.norm_integral_Ia(params, 0) == pytest.approx(11.13665, abs=1e-5)


@pytest.mark.parametrize("eta, k, alpha, a", [(2.0, 3, 0.5 / 3, 1), (0.7, 2, 0.3, -2), (1.3, 1, 0.9, 4)])
def test_norm_integral_matches_quadrature(eta, k, alpha, a):
    params = CylinderParams(eta=eta, alpha=alpha, k=k)
    b = a - params.m_k
    width = params.width
    # ∫ |z|^{2a}·h^k·|z|^{-2𝔪}·ω em t = log|z|, já integrado no ângulo
    integral, _ = quad(lambda t: math.exp(2 * b * t - width * t * t), -math.inf, math.inf, epsabs=0, epsrel=1e-12)
    assert cylinder.norm_integral_Ia(params, a) == pytest.approx(2 * math.pi * eta * eta * integral, rel=1e-10)


def test_norm_integral_example():
    params = CylinderParams(eta=2.0, alpha=0.5 / 3, k=3)
    assert params.m_k == pytest.approx(0.5)
    assert cylinder.norm_integral_Ia(params, 1) == pytest.approx(13.1302, abs=1e-4)


def test_transverse_moment():
    for a, k in [(0, 1), (3, 2), (7, 5)]:
        integral, _ = quad(lambda r: 2 * math.pi * r ** (2 * a + 1) * math.exp(-0.5 * k * r * r), 0, math.inf, epsabs=0, epsrel=1e-12)
        assert cylinder.transverse_moment(a, k) == pytest.approx(integral, rel=1e-9)


# Densidade do cilindro
def test_direct_base_case():
    params = CylinderParams(eta=1.0, alpha=0.0, k=1)
    expected = sum(math.exp(-a * a) for a in range(-10, 11)) / (2 * math.pi * math.sqrt(math.pi))
    assert cylinder.rho_cyl_direct(params) == pytest.approx(expected, rel=1e-14)
    assert cylinder.rho_cyl_direct(params) == pytest.approx(0.1591713, abs=1e-6)


def test_poisson_base_case():
    params = CylinderParams(eta=1.0, alpha=0.0, k=1)
    expected = (1 + 2 * math.exp(-math.pi ** 2) + 2 * math.exp(-4 * math.pi ** 2)) / (2 * math.pi)
    assert cylinder.rho_cyl_poisson(params) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("eta, alpha, k", [(1.0, 0.5, 1), (0.3, 0.2, 1), (0.8, 0.7, 4), (2.5, 0.1, 2)])
@pytest.mark.parametrize("t", [-3.0, -0.4, 0.0, 0.25, 2.0])
def test_direct_equals_poisson(eta, alpha, k, t):
    params = CylinderParams(eta=eta, alpha=alpha, k=k, t=t)
    direct = cylinder.rho_cyl_direct(params)
    assert cylinder.rho_cyl_poisson(params) == pytest.approx(direct, rel=1e-12)


def test_direct_equals_poisson_full_sweep():
    worst = 0.0
    for eta, alpha, k in itertools.product((0.5, 0.8, 1.0, 1.5, 2.0), (0.0, 0.1, 0.25, 0.5, 0.9), (1, 2, 3, 5)):
        params = CylinderParams(eta=eta, alpha=alpha, k=k)
        for t in (-2.0, -1.0, -0.35, 0.0, 0.4, 1.3, 2.5):
            direct = cylinder.rho_cyl_direct(params.at(t))
            poisson = cylinder.rho_cyl_poisson(params.at(t))
            worst = max(worst, abs(direct - poisson) / poisson)
    assert worst < 1e-11


def test_poisson_periodic_in_t():
    params = CylinderParams(eta=0.6, alpha=0.35, k=2, t=0.17)
    shifted = params.at(params.t + 1.0 / params.width)
    assert cylinder.rho_cyl_poisson(shifted) == pytest.approx(cylinder.rho_cyl_poisson(params), rel=1e-12)


def test_large_circle_flat_limit():
    params = CylinderParams(eta=3.0, alpha=0.4, k=5, t=0.3)
    assert cylinder.rho_cyl_poisson(params) == pytest.approx(5 / (2 * math.pi), rel=1e-15)


def test_rho_cyl_nd():
    params = CylinderParams(eta=1.0, alpha=0.0, k=1, n=2)
    assert cylinder.rho_cyl_nd(params) == pytest.approx(0.1591713 / (2 * math.pi), abs=1e-7)


def test_rho_cyl_nd_direct_independent_of_transverse_point():
    params = CylinderParams(eta=0.7, alpha=0.3, k=2, t=0.4, n=3)
    expected = cylinder.rho_cyl_nd(params)
    for w_prime in ([0.0, 0.0], [0.5 + 0.2j, -1.0j], [2.0, 1.5 - 1.5j]):
        assert cylinder.rho_cyl_nd_direct(params, w_prime) == pytest.approx(expected, rel=1e-10)


def test_rho_cyl_nd_direct_wrong_dimension():
    with pytest.raises(InvalidOption):
        cylinder.rho_cyl_nd_direct(CylinderParams(eta=1.0, n=2), [0.0, 0.0])


# Holonomia do cilindro
def test_cyl_holonomy_phase():
    params = CylinderParams(eta=1.0, alpha=0.25, k=1, t=0.1)
    assert cylinder.cyl_holonomy_phase(params, 0) == 1.0
    assert cylinder.cyl_holonomy_phase(params, 1) == pytest.approx(cmath.exp(-1j * (math.pi / 2 + 0.2 * math.pi)), abs=1e-14)
    flat = CylinderParams(eta=1.0, alpha=0.0, k=1)
    assert cylinder.cyl_holonomy_phase(flat, -1) == pytest.approx(1.0, abs=1e-14)


def test_loop_weight_matches_length():
    params = CylinderParams(eta=0.8, k=3)
    length = 2 * math.pi * params.eta
    assert math.exp(-params.width * math.pi ** 2) == pytest.approx(math.exp(-0.25 * params.k * length ** 2), rel=1e-14)


def test_cylinder_coordinates(sq1):
    v = lattice.lattice_vector(sq1, (0, 1))
    eta, t = cylinder.cylinder_coordinates(sq1, v, [0.0])
    assert eta == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-12)
    assert t == pytest.approx(0.0, abs=1e-14)
    _, t_moved = cylinder.cylinder_coordinates(sq1, v, [0.5j])
    assert abs(t_moved) < 1e-12


def test_sweep_rows():
    params = CylinderParams(eta=0.9, alpha=0.6, k=2, n=2)
    rows = cylinder.sweep(params, [-1.0, 0.0, 1.5])
    assert [row[0] for row in rows] == [-1.0, 0.0, 1.5]
    for t, direct, poisson, diff in rows:
        assert diff == abs(direct - poisson)
        assert diff <= 1e-12 * poisson

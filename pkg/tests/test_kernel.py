import io
import math

import numpy as np
import pytest

from app.exceptions import InvalidOption
from app.models.torus import Semicharacter
from app.src import kernel, lattice


def _brute_force_sq1(coords, k=1, size=12):
    """2π·ρ_k/k no SQ1 com χ₀ somando todos os laços com |m|, |n| ≤ size."""
    total = 0.0
    x1, x2 = coords
    sign = kernel.holonomy.calibration_sign()
    for m in range(-size, size + 1):
        for n in range(-size, size + 1):
            turns = k * (m * n / 2.0) + k * sign * (n * x1 - m * x2)
            total += math.exp(-0.25 * k * 2 * math.pi * (m * m + n * n)) * math.cos(2 * math.pi * turns)
    return total


# Série do núcleo
def test_rho_at_origin(sq1, chi0, origin):
    result = kernel.rho_diag(sq1, chi0, 1, origin, 1e-10)
    assert 2 * math.pi * result.value == pytest.approx(1.6692, abs=1e-4)
    assert 2 * math.pi * result.value == pytest.approx(_brute_force_sq1((0.0, 0.0)), abs=1e-9)
    assert result.tail <= 1e-10
    assert result.prefactor == pytest.approx(1 / (2 * math.pi))


def test_rho_vanishes_at_half_period(sq1, chi0, half_period):
    result = kernel.rho_diag(sq1, chi0, 1, half_period, 1e-10)
    assert abs(result.value) < 1e-9 / (2 * math.pi)


@pytest.mark.parametrize("coords", [(0.1, 0.7), (0.33, 0.25), (0.9, 0.05)])
@pytest.mark.parametrize("k", [1, 3])
def test_rho_matches_brute_force(sq1, chi0, coords, k):
    p = lattice.point_from_coords(sq1, coords)
    value = kernel.rho_diag(sq1, chi0, k, p, 1e-12).value
    assert 2 * math.pi * value / k == pytest.approx(_brute_force_sq1(coords, k), abs=1e-10)


def test_rho_large_k(sq1, chi0):
    p = lattice.point_from_coords(sq1, (0.3, 0.6))
    result = kernel.rho_diag(sq1, chi0, 50, p, 1e-10)
    assert 2 * math.pi * result.value / 50 == pytest.approx(1.0, abs=4 * math.exp(-50 * math.pi / 2) + 1e-10)


def test_enclosure_contains_value(sq1, chi0, origin):
    result = kernel.rho_diag(sq1, chi0, 2, origin, 1e-6)
    low, high = result.enclosure()
    reference = kernel.rho_diag(sq1, chi0, 2, origin, 1e-14).value
    assert low <= reference <= high


def test_rho_non_negative(skew):
    chi = Semicharacter((0.3, 0.1))
    grid = kernel.rho_grid(skew, chi, 1, 16, 1e-10)
    assert grid.min > -1e-12


def test_gradient_matches_finite_difference(skew):
    chi = Semicharacter((0.15, 0.4))
    rng = np.random.default_rng(11)
    h = 1e-5
    for coords in rng.random((20, 2)):
        p = lattice.point_from_coords(skew, coords)
        gradient = kernel.rho_gradient(skew, chi, 2, p, 1e-12)
        for axis in range(2):
            step = np.zeros(2)
            step[axis] = h
            up = kernel.rho_diag(skew, chi, 2, lattice.point_from_coords(skew, coords + step, canonical=False), 1e-12).value
            down = kernel.rho_diag(skew, chi, 2, lattice.point_from_coords(skew, coords - step, canonical=False), 1e-12).value
            assert gradient[axis] == pytest.approx((up - down) / (2 * h), rel=1e-6, abs=1e-8)


# Cauda
def test_tail_bound_small(sq1):
    assert kernel.tail_bound(sq1, 10.0, 1) <= 1e-8


def test_tail_bound_monotone(sq1):
    values = [kernel.tail_bound(sq1, R, 2) for R in (3.0, 4.0, 6.0, 9.0)]
    assert values == sorted(values, reverse=True)


def test_tail_bound_dominates_true_tail(sq1):
    l1, _, _ = lattice.shells(sq1)
    beyond = [v.length for v in lattice.enumerate_within(sq1, 20.0) if v.length > l1]
    true_tail = sum(math.exp(-0.25 * length ** 2) for length in beyond)
    assert kernel.tail_bound(sq1, l1, 1) >= true_tail


@pytest.mark.parametrize("torus_name", ["sq1", "d2", "skew"])
@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("eps", [1e-10, 1e-12])
def test_tail_bound_dominates_true_tail_at_working_radius(request, chi0, torus_name, k, eps):
    torus = request.getfixturevalue(torus_name)
    p = lattice.point_from_coords(torus, (0.3, 0.7))
    result = kernel.rho_diag(torus, chi0, k, p, eps)
    R = result.radius
    beyond = [v.length for v in lattice.enumerate_within(torus, R + 10.0) if v.length > R]
    true_tail = sum(math.exp(-0.25 * k * length ** 2) for length in beyond)
    assert true_tail <= kernel.tail_bound(torus, R, k)
    assert kernel.tail_bound(torus, R, k) == result.tail
    assert result.tail <= eps


def test_truncation_radius(sq1):
    R = kernel.truncation_radius(sq1, 1, 1e-10)
    assert kernel.tail_bound(sq1, R, 1) <= 1e-10
    assert kernel.tail_bound(sq1, 0.999 * R, 1) > 1e-10


def test_truncation_radius_invalid_eps(sq1):
    with pytest.raises(InvalidOption):
        kernel.truncation_radius(sq1, 1, 0.0)


def test_series_terms_symmetric(sq1, chi0):
    series = kernel.prepare_series(sq1, chi0, 1, 1e-10)
    assert series.terms % 2 == 0
    assert kernel.prepare_series(sq1, chi0, 1, 1e-10) is series


# Malha
def test_grid_extrema_sq1(sq1, chi0):
    grid = kernel.rho_grid(sq1, chi0, 1, 32, 1e-10)
    assert tuple(grid.coords[grid.argmin]) == (0.5, 0.5)
    assert tuple(grid.coords[grid.argmax]) == (0.0, 0.0)


def test_grid_smoke(skew, chi0):
    grid = kernel.rho_grid(skew, chi0, 1, 2)
    assert grid.coords.shape == (4, 2)
    assert np.all(np.isfinite(grid.rho))


def test_grid_too_coarse(sq1, chi0):
    with pytest.raises(InvalidOption):
        kernel.rho_grid(sq1, chi0, 1, 1)


def test_grid_independent_of_threads(sq2, chi0, monkeypatch):
    chi = Semicharacter((0.0, 0.0, 0.25, 0.5))
    monkeypatch.setattr(kernel.config, "GRID_CHUNK", 100)
    single = kernel.rho_grid(sq2, chi, 1, 6, 1e-10, threads=1)
    several = kernel.rho_grid(sq2, chi, 1, 6, 1e-10, threads=4)
    assert np.array_equal(single.rho, several.rho)


def test_grid_csv(sq1, chi0):
    grid = kernel.rho_grid(sq1, chi0, 1, 4, 1e-10)
    buffer = io.StringIO()
    grid.write_csv(buffer)
    lines = buffer.getvalue().splitlines()
    assert lines[0] == "coord_1,coord_2,rho,tail"
    assert len(lines) == 17
    assert lines[1].startswith("0,0,")
    assert lines[2].startswith("0,0.25,")


def test_grid_mean_d2(d2, chi0):
    grid = kernel.rho_grid(d2, chi0, 1, 16, 1e-10)
    assert grid.mean * lattice.volume(d2) == pytest.approx(2.0, abs=1e-8)


# Integral
@pytest.mark.parametrize("torus_name, k, expected", [("sq1", 1, 1), ("sq1", 3, 3), ("d2", 2, 4), ("skew", 2, 2)])
def test_integral_check(request, chi0, torus_name, k, expected):
    torus = request.getfixturevalue(torus_name)
    integral, dimension = kernel.integral_check(torus, chi0, k, 8, 1e-10)
    assert dimension == expected
    assert integral == pytest.approx(expected, abs=1e-8)


def test_integral_check_sq2(sq2):
    chi = Semicharacter((0.1, 0.2, 0.3, 0.4))
    integral, dimension = kernel.integral_check(sq2, chi, 2, 8, 1e-10)
    assert dimension == 4
    assert integral == pytest.approx(4.0, abs=1e-8)


def test_integral_check_res_too_small(sq1, chi0):
    with pytest.raises(InvalidOption):
        kernel.integral_check(sq1, chi0, 1, 4)


# Fora da diagonal
def test_offdiag_half_period(sq1, origin, half_period):
    result = kernel.offdiag_bound(sq1, 1, origin, half_period, 1e-12)
    brute = sum(
        math.exp(-0.5 * math.pi * ((m + 0.5) ** 2 + (n + 0.5) ** 2))
        for m in range(-12, 12)
        for n in range(-12, 12)
    )
    assert 2 * math.pi * result.value == pytest.approx(brute, abs=1e-10)
    assert 2 * math.pi * result.value == pytest.approx(1.985, abs=1e-3)


def test_offdiag_diagonal_dominates_rho(sq1, chi0):
    p = lattice.point_from_coords(sq1, (0.2, 0.45))
    bound = kernel.offdiag_bound(sq1, 1, p, p, 1e-10)
    series = kernel.prepare_series(sq1, chi0, 1, 1e-10)
    assert bound.value == pytest.approx(series.prefactor * (1.0 + series.weights.sum()), rel=1e-12)
    assert bound.value >= kernel.rho_diag(sq1, chi0, 1, p, 1e-10).value


def test_poisson_limit(sq1, chi0):
    deviation, bound = kernel.tcz_leading_check(sq1, chi0, 10, 8, 1e-12)
    assert deviation <= bound

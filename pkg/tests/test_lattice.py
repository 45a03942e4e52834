import math

import numpy as np
import pytest

from app.exceptions import DegenerateBasis, IntegralityViolation, InvalidOption, NotPositiveDefinite, RadiusTooLarge
from app.models.torus import PolarizedTorus, Semicharacter
from app.schemas.torus import TorusConfig
from app.src import lattice


# Validação
def test_validate_sq1(sq1):
    report = lattice.validate(sq1)
    assert report.positive_definite
    assert report.E == [[0, -1], [1, 0]]
    assert report.pfaffian == 1
    assert report.rank_E == 2


def test_validate_d2(d2):
    assert lattice.validate(d2).pfaffian == 2


def test_validate_rect(rect):
    report = lattice.validate(rect)
    assert report.E == [[0, -2], [2, 0]]
    assert report.pfaffian == 2


def test_validate_integrality_violation():
    torus = PolarizedTorus.from_data([[1.0], [1j]], [[1.001]])
    with pytest.raises(IntegralityViolation):
        lattice.validate(torus)


def test_validate_not_positive():
    torus = PolarizedTorus.from_data([[1.0], [1j]], [[-1.0]])
    with pytest.raises(NotPositiveDefinite):
        lattice.validate(torus)


def test_validate_not_hermitian():
    torus = PolarizedTorus.from_data([[1.0, 0.0], [1j, 0.0], [0.0, 1.0], [0.0, 1j]], [[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(NotPositiveDefinite):
        lattice.validate(torus)


def test_validate_degenerate_basis():
    torus = PolarizedTorus.from_data([[1.0], [2.0]], [[1.0]])
    with pytest.raises(DegenerateBasis):
        lattice.validate(torus)


def test_load_torus(sq1_config):
    torus, chi, k = lattice.load_torus(TorusConfig.model_validate(sq1_config))
    assert torus.n == 1
    assert chi == Semicharacter((0.0, 0.0))
    assert k == 1
    assert torus.E.tolist() == [[0, -1], [1, 0]]


def test_volume(sq1, d2):
    assert lattice.volume(sq1) == pytest.approx(2 * math.pi, rel=1e-12)
    assert lattice.volume(d2) == pytest.approx(4 * math.pi, rel=1e-12)


# Comprimentos
def test_length_basis_vector(sq1):
    assert lattice.length(sq1, [1.0]) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)
    assert lattice.lattice_vector(sq1, (1, 0)).length == pytest.approx(2.5066283, abs=1e-7)


def test_length_diagonal(sq1):
    assert lattice.length(sq1, [1 + 1j]) == pytest.approx(3.5449077, abs=1e-7)


def test_length_zero(sq1, sq2):
    assert lattice.length(sq1, [0.0]) == 0.0
    assert lattice.lattice_vector(sq2, (0, 0, 0, 0)).is_zero


# Enumeração
def test_enumerate_sq1(sq1):
    vectors = lattice.enumerate_within(sq1, 3.6)
    assert len(vectors) == 8
    assert [v.coords for v in vectors[:4]] == [(-1, 0), (0, -1), (0, 1), (1, 0)]
    assert {v.coords for v in vectors[4:]} == {(1, 1), (-1, -1), (1, -1), (-1, 1)}
    assert vectors[4].length == pytest.approx(math.sqrt(4 * math.pi), rel=1e-12)


def test_enumerate_below_shortest(sq1):
    assert lattice.enumerate_within(sq1, 1.0) == []


def test_enumerate_d2(d2):
    vectors = lattice.enumerate_within(d2, 4.0)
    assert len(vectors) == 4
    assert all(v.length == pytest.approx(math.sqrt(4 * math.pi), rel=1e-12) for v in vectors)


def test_enumerate_matches_brute_force(skew):
    R = 7.5
    found = {v.coords for v in lattice.enumerate_within(skew, R)}
    expected = set()
    for m in range(-6, 7):
        for n in range(-6, 7):
            if (m, n) != (0, 0) and lattice.lattice_vector(skew, (m, n)).length <= R:
                expected.add((m, n))
    assert found == expected


def test_enumerate_negative_radius(sq1):
    with pytest.raises(InvalidOption):
        lattice.enumerate_within(sq1, -1.0)


def test_enumerate_too_many_terms(sq1):
    with pytest.raises(RadiusTooLarge) as exc:
        lattice.enumerate_within(sq1, 50.0, max_terms=100)
    assert exc.value.required > 100


def test_enumerate_shifted_half_period(sq1):
    coords, lengths = lattice.enumerate_shifted(sq1, (0.5, 0.5), 1.8)
    assert len(coords) == 4
    assert np.allclose(lengths, math.sqrt(math.pi))


# Camadas
def test_shells_sq1(sq1):
    l1, l2, first = lattice.shells(sq1)
    assert l1 == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)
    assert l2 == pytest.approx(math.sqrt(4 * math.pi), rel=1e-12)
    assert len(first) == 4


def test_shells_d2(d2):
    l1, _, first = lattice.shells(d2)
    assert l1 == pytest.approx(math.sqrt(4 * math.pi), rel=1e-12)
    assert len(first) == 4


def test_shells_rect(rect):
    _, _, first = lattice.shells(rect)
    assert {v.coords for v in first} == {(1, 0), (-1, 0)}


# Semicaracteres
def test_chi_eval_cocycle(sq1, chi0):
    assert lattice.chi_eval(chi0, sq1, (1, 1)) == pytest.approx(-1.0, abs=1e-12)
    assert lattice.chi_eval(chi0, sq1, (2, 0)) == pytest.approx(1.0, abs=1e-12)
    assert lattice.chi_eval(chi0, sq1, (0, 0)) == pytest.approx(1.0, abs=1e-12)


def test_chi_eval_is_semicharacter(sq1):
    chi = Semicharacter((0.3, 0.7))
    for u, w in [((1, 0), (0, 1)), ((2, -1), (1, 3)), ((-1, 2), (4, 1))]:
        total = tuple(a + b for a, b in zip(u, w))
        E_uw = np.array(u) @ sq1.E @ np.array(w)
        expected = lattice.chi_eval(chi, sq1, u) * lattice.chi_eval(chi, sq1, w) * np.exp(1j * math.pi * E_uw)
        assert lattice.chi_eval(chi, sq1, total) == pytest.approx(expected, abs=1e-12)


def test_chi_phase_vectorized(sq1):
    chi = Semicharacter((0.25, 0.5))
    coords = np.array([[1, 0], [1, 1], [3, -2]])
    phases = lattice.chi_phase(chi, sq1, coords)
    assert phases == pytest.approx([float(lattice.chi_phase(chi, sq1, row)) for row in coords])


# Pontos e distâncias
def test_point_from_coords_canonical(sq1):
    p = lattice.point_from_coords(sq1, (1.25, -0.5))
    assert p.key() == (0.25, 0.5)
    assert p.lift[0] == pytest.approx(0.25 + 0.5j)


def test_point_from_lift(skew):
    p = lattice.point_from_lift(skew, [0.5 + 0.6j])
    assert p.coords == pytest.approx([0.5 - 0.3 * 0.5, 0.5])


def test_real_coordinates_not_reduced(sq1):
    assert lattice.real_coordinates(sq1, [1.25 - 0.5j]) == pytest.approx([1.25, -0.5])


def test_torus_distance(sq1, origin, half_period):
    assert lattice.torus_distance(sq1, origin, half_period) == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    near = lattice.point_from_coords(sq1, (0.9, 0.0))
    assert lattice.torus_distance(sq1, origin, near) == pytest.approx(0.1 * math.sqrt(2 * math.pi), rel=1e-12)


# Forma normal e redução inteira
def test_normal_form_rotation(sq2):
    v = lattice.lattice_vector(sq2, (1, 1, 0, 0))
    rotation, eta = lattice.normal_form_rotation(sq2, v)
    image = rotation @ v.embedding
    assert np.allclose(image, [0.0, 1j * v.length], atol=1e-12)
    assert eta == pytest.approx(v.length / (2 * math.pi), rel=1e-12)
    rng = np.random.default_rng(3)
    u = rng.normal(size=2) + 1j * rng.normal(size=2)
    w = rng.normal(size=2) + 1j * rng.normal(size=2)
    assert np.vdot(rotation @ w, rotation @ u) == pytest.approx(2 * math.pi * sq2.h(u, w), abs=1e-12)


def test_normal_form_rotation_zero(sq1):
    with pytest.raises(InvalidOption):
        lattice.normal_form_rotation(sq1, [0.0])


def test_column_reduce():
    A = [[2, 4, 6], [1, 3, 1]]
    B, U = lattice.column_reduce(A)
    reduced = np.array(A) @ np.array(U)
    assert np.array_equal(reduced[:, :2], np.array(B))
    assert not reduced[:, 2:].any()
    assert abs(round(np.linalg.det(np.array(U, dtype=float)))) == 1
    assert B[0][1] == 0 and B[0][0] > 0 and B[1][1] > 0


def test_column_reduce_gcd():
    B, _ = lattice.column_reduce([[4, -6]])
    assert B == [[2]]


def test_column_reduce_dependent_rows():
    with pytest.raises(InvalidOption):
        lattice.column_reduce([[1, 2], [2, 4]])


def test_independent_subset(sq1):
    vectors = [lattice.lattice_vector(sq1, c) for c in [(1, 0), (-1, 0), (0, 1), (1, 1)]]
    chosen = lattice.independent_subset(vectors)
    assert [v.coords for v in chosen] == [(1, 0), (0, 1)]

import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app import config
from app.exceptions import (
    DegenerateBasis,
    IntegralityViolation,
    InvalidOption,
    NotPositiveDefinite,
    RadiusTooLarge,
)
from app.models.torus import LatticeVector, PolarizedTorus, Semicharacter, TorusPoint
from app.schemas.results import ValidationReport
from app.schemas.torus import TorusConfig

logger = logging.getLogger(__name__)


def validate(torus: PolarizedTorus, tol_int: float = None) -> ValidationReport:
    """
    Valida o toro polarizado: H hermitiana positiva, base independente sobre R e Im H(Λ, Λ) ⊂ Z.
    Levanta o erro correspondente na primeira condição violada.
    """
    tol_int = config.TOL_INT if tol_int is None else tol_int
    H = torus.H
    scale = max(1.0, float(np.max(np.abs(H))))
    if np.max(np.abs(H - H.conj().T)) > 1e-12 * scale:
        raise NotPositiveDefinite("H não é hermitiana")
    eigenvalues = np.linalg.eigvalsh(H)
    min_eigenvalue = float(eigenvalues.min())
    if min_eigenvalue <= config.TOL_POSITIVE * max(1.0, float(eigenvalues.max())):
        raise NotPositiveDefinite(f"H não é positiva definida (menor autovalor {min_eigenvalue:.3e})")

    if torus.basis.shape != (2 * torus.n, torus.n):
        raise DegenerateBasis(f"a base deve ter {2 * torus.n} vetores em C^{torus.n}")
    if np.linalg.matrix_rank(torus.real_basis) < 2 * torus.n:
        raise DegenerateBasis("os vetores da base são linearmente dependentes sobre R")

    residual = float(np.max(np.abs(torus.E_raw - np.rint(torus.E_raw))))
    if residual > tol_int:
        raise IntegralityViolation(
            f"Im H(λ_i, λ_j) não é inteiro: resíduo {residual:.3e} > {tol_int:.1e}"
        )

    rank_E = int(np.linalg.matrix_rank(torus.E.astype(float)))
    return ValidationReport(
        n=torus.n,
        positive_definite=True,
        min_eigenvalue=min_eigenvalue,
        integrality_residual=residual,
        rank_E=rank_E,
        pfaffian=pfaffian(torus.E) if rank_E == 2 * torus.n else None,
        E=torus.E.tolist(),
    )


def pfaffian(E: np.ndarray) -> int:
    """|Pf(E)| = sqrt(|det E|) para a forma alternada inteira."""
    return int(round(math.sqrt(abs(np.linalg.det(np.asarray(E, dtype=float))))))


def load_torus(torus_config: TorusConfig) -> Tuple[PolarizedTorus, Semicharacter, int]:
    """
    Monta e valida o toro a partir do arquivo de configuração.
    """
    torus = PolarizedTorus.from_data(torus_config.basis_array(), torus_config.hermitian_array())
    validate(torus)
    return torus, Semicharacter(torus_config.phases()), torus_config.k


def volume(torus: PolarizedTorus) -> float:
    """
    Vol(X) = ∫ ω^n/n!, igual ao volume euclidiano do paralelepípedo fundamental
    nas coordenadas em que ω é a forma padrão: sqrt(det G).
    """
    return float(math.sqrt(abs(np.linalg.det(torus.gram))))


def lattice_vector(torus: PolarizedTorus, coords: Sequence[int]) -> LatticeVector:
    coords = tuple(int(c) for c in coords)
    m = np.array(coords, dtype=float)
    return LatticeVector(
        coords=coords,
        embedding=m @ torus.basis,
        length=math.sqrt(max(float(m @ torus.gram @ m), 0.0)),
    )


def length(torus: PolarizedTorus, v) -> float:
    """
    ℓ(v) = sqrt(2π·H(v, v)), o comprimento do laço geodésico γ_{p,v}.
    """
    if isinstance(v, LatticeVector):
        return v.length
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    return math.sqrt(max(2.0 * math.pi * torus.h(v, v).real, 0.0))


def _estimated_count(torus: PolarizedTorus, R: float) -> int:
    dim = 2 * torus.n
    ball = math.pi ** torus.n * R ** dim / math.factorial(torus.n)
    return int(ball / volume(torus)) + 1


def _fincke_pohst(
    torus: PolarizedTorus,
    R: float,
    center: Optional[np.ndarray] = None,
    max_terms: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Enumera x ∈ Z^{2n} com (x + c)^T G (x + c) ≤ R², usando a fatoração de Cholesky de G.
    Devolve as coordenadas inteiras e os quadrados das normas.
    """
    max_terms = config.MAX_TERMS if max_terms is None else max_terms
    dim = 2 * torus.n
    upper = np.linalg.cholesky(torus.gram).T
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    bound = R * R * (1.0 + 1e-12) + 1e-300
    x = np.zeros(dim, dtype=np.int64)
    found: List[np.ndarray] = []

    def descend(i: int, remaining: float) -> None:
        shift = float(upper[i, i + 1:] @ (x[i + 1:] + c[i + 1:])) / upper[i, i]
        middle = -c[i] - shift
        half_width = math.sqrt(max(remaining, 0.0)) / upper[i, i]
        for xi in range(math.ceil(middle - half_width), math.floor(middle + half_width) + 1):
            step = upper[i, i] * (xi - middle)
            rest = remaining - step * step
            if rest < 0.0:
                continue
            x[i] = xi
            if i == 0:
                found.append(x.copy())
                if len(found) > max_terms:
                    required = _estimated_count(torus, R)
                    raise RadiusTooLarge(
                        f"raio {R:.6g} exige mais de {max_terms} vetores (estimativa {required})",
                        required=max(required, max_terms + 1),
                    )
            else:
                descend(i - 1, rest)
        x[i] = 0

    descend(dim - 1, bound)
    if not found:
        return np.zeros((0, dim), dtype=np.int64), np.zeros(0)
    coords = np.array(found, dtype=np.int64)
    shifted = coords + c
    exact = np.einsum("ki,ij,kj->k", shifted, torus.gram, shifted)
    keep = exact <= R * R * (1.0 + 1e-12)
    return coords[keep], np.maximum(exact[keep], 0.0)


def enumerate_within(torus: PolarizedTorus, R: float, max_terms: Optional[int] = None) -> List[LatticeVector]:
    """
    Todos os v ∈ Λ não nulos com ℓ(v) ≤ R, cada um uma vez,
    ordenados por comprimento e depois lexicograficamente pelas coordenadas.
    """
    if R < 0:
        raise InvalidOption("o raio de enumeração deve ser não negativo")
    coords, norms = _fincke_pohst(torus, R, max_terms=max_terms)
    vectors = [
        LatticeVector(coords=tuple(int(c) for c in row), embedding=row @ torus.basis, length=math.sqrt(q))
        for row, q in zip(coords, norms)
        if row.any()
    ]
    vectors.sort(key=lambda v: (round(v.length, 10), v.coords))
    logger.debug("enumerate_within: R=%.6g, %d vetores", R, len(vectors))
    return vectors


def enumerate_shifted(
    torus: PolarizedTorus, center, R: float, max_terms: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vetores v ∈ Λ (coordenadas inteiras) com ℓ(c + v) ≤ R, onde `center` são as coordenadas reais de c.
    Devolve (coordenadas, comprimentos ℓ(c + v)).
    """
    if R < 0:
        raise InvalidOption("o raio de enumeração deve ser não negativo")
    coords, norms = _fincke_pohst(torus, R, center=np.asarray(center, dtype=float), max_terms=max_terms)
    return coords, np.sqrt(norms)


def shells(torus: PolarizedTorus) -> Tuple[float, float, List[LatticeVector]]:
    """
    (l1, l2, S1): menor comprimento não nulo, o seguinte estritamente maior e a primeira camada.
    """
    shortest_basis = math.sqrt(float(np.min(np.diag(torus.gram))))
    vectors = enumerate_within(torus, 2.0 * shortest_basis)
    l1 = vectors[0].length
    tol = config.TOL_SHELL * l1
    first = [v for v in vectors if v.length <= l1 + tol]
    longer = [v.length for v in vectors if v.length > l1 + tol]
    return l1, min(longer), first


def chi_phase(chi: Semicharacter, torus: PolarizedTorus, coords) -> np.ndarray:
    """
    Fase (mod 1) de χ(Σ n_i λ_i) = Π χ(λ_i)^{n_i} · exp(iπ Σ_{i<j} n_i n_j E_ij).
    Aceita um vetor de coordenadas ou uma matriz com um vetor por linha.
    """
    m = np.asarray(coords, dtype=float)
    phases = np.asarray(chi.phases, dtype=float)
    upper = np.triu(torus.E.astype(float), 1)
    if m.ndim == 1:
        return (phases @ m + 0.5 * (m @ upper @ m)) % 1.0
    return (m @ phases + 0.5 * np.einsum("ki,ij,kj->k", m, upper, m)) % 1.0


def chi_eval(chi: Semicharacter, torus: PolarizedTorus, coords) -> complex:
    return complex(np.exp(2j * np.pi * float(chi_phase(chi, torus, coords))))


def point_from_coords(torus: PolarizedTorus, coords, canonical: bool = True) -> TorusPoint:
    coords = np.asarray(coords, dtype=float)
    if canonical:
        coords = coords % 1.0
        coords[coords >= 1.0] = 0.0
    return TorusPoint(lift=coords @ torus.basis, coords=coords)


def real_coordinates(torus: PolarizedTorus, z) -> np.ndarray:
    """
    Coordenadas de rede (não reduzidas) de um ponto z ∈ C^n: z = Σ x_i λ_i.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return np.linalg.solve(torus.real_basis, np.concatenate([z.real, z.imag]))


def point_from_lift(torus: PolarizedTorus, lift) -> TorusPoint:
    lift = np.atleast_1d(np.asarray(lift, dtype=complex))
    return TorusPoint(lift=lift, coords=real_coordinates(torus, lift))


def torus_distance(torus: PolarizedTorus, x: TorusPoint, y: TorusPoint) -> float:
    """
    Distância geodésica em X: min sobre v ∈ Λ de ℓ(x̃ − ỹ + v).
    """
    diff = np.asarray(x.coords, dtype=float) - np.asarray(y.coords, dtype=float)
    diff = diff - np.rint(diff)
    reach = math.sqrt(max(float(diff @ torus.gram @ diff), 0.0))
    _, lengths = enumerate_shifted(torus, diff, reach)
    return float(lengths.min()) if len(lengths) else reach


def normal_form_rotation(torus: PolarizedTorus, v) -> Tuple[np.ndarray, float]:
    """
    Matriz R com 2π·H(u, w) = <Ru, Rw> e R v = (0, ..., 0, i·ℓ(v)); devolve também η = ℓ(v)/2π.
    É a rotação unitária que leva o cilindro C^n/<v> à forma normal C^{n-1} × C*.
    """
    v = v.embedding if isinstance(v, LatticeVector) else np.atleast_1d(np.asarray(v, dtype=complex))
    n = torus.n
    lower = np.linalg.cholesky(2.0 * np.pi * torus.H.T)
    T = lower.conj().T
    image = T @ v
    size = float(np.linalg.norm(image))
    if size == 0.0:
        raise InvalidOption("o vetor do cilindro deve ser não nulo")
    direction = image / size
    Q, _ = np.linalg.qr(np.column_stack([direction, np.eye(n, dtype=complex)]))
    phase = np.vdot(direction, Q[:, 0])
    # a direção do laço vai para a última coordenada
    swap = np.eye(n, dtype=complex)
    swap[[0, n - 1]] = swap[[n - 1, 0]]
    rotation = swap @ (1j * phase * Q.conj().T) @ T
    return rotation, size / (2.0 * math.pi)


def column_reduce(A: Sequence[Sequence[int]]) -> Tuple[List[List[int]], List[List[int]]]:
    """
    Redução inteira por colunas: devolve (B, U) com A·U = [B | 0], U unimodular e B triangular inferior
    com diagonal positiva. Exige que as linhas de A sejam independentes.
    """
    A = [[int(a) for a in row] for row in A]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    U = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def swap(i, j):
        for M in (A, U):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def subtract(target, source, q):
        for M in (A, U):
            for row in M:
                row[target] -= q * row[source]

    for i in range(rows):
        while True:
            nonzero = [j for j in range(i, cols) if A[i][j] != 0]
            if not nonzero:
                raise InvalidOption("as linhas da matriz inteira são dependentes")
            pivot = min(nonzero, key=lambda j: abs(A[i][j]))
            swap(i, pivot)
            clean = True
            for j in range(i + 1, cols):
                if A[i][j]:
                    subtract(j, i, A[i][j] // A[i][i])
                    if A[i][j]:
                        clean = False
            if clean:
                break
        if A[i][i] < 0:
            for M in (A, U):
                for row in M:
                    row[i] = -row[i]

    B = [row[:rows] for row in A]
    return B, U


def independent_subset(vectors: Iterable[LatticeVector]) -> List[LatticeVector]:
    """Subconjunto maximal linearmente independente, escolhido gulosamente na ordem dada."""
    chosen: List[LatticeVector] = []
    for v in vectors:
        candidate = np.array([u.coords for u in chosen] + [v.coords], dtype=float)
        if np.linalg.matrix_rank(candidate) == len(chosen) + 1:
            chosen.append(v)
    return chosen

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from app import config
from app.exceptions import FitResidualTooLarge, InconsistentSystem, InvalidOption, UnderdeterminedSystem
from app.models.torus import HolonomyTarget, LatticeVector, PolarizedTorus, Semicharacter, TorusPoint
from app.schemas.results import CompareReport, ExtremumReport, GridField, LocalizationRow, RecoveryResult
from app.src import holonomy, kernel, lattice

logger = logging.getLogger(__name__)

TIE_TOL = 1e-9
DEDUP_TOL = 1e-6
HOLONOMY_TOL = 1e-9
MAX_REFINED = 64
FAMILY_MESH = 8
FIBER_RES_ND = 12
REFINE_EPS = 1e-12


def _wrap(coords) -> np.ndarray:
    coords = np.mod(np.asarray(coords, dtype=float), 1.0)
    coords[coords > 1.0 - 1e-12] = 0.0
    return coords


def _key(coords) -> Tuple[int, ...]:
    return tuple(int(round(c * 1e9)) % 10 ** 9 for c in coords)


def _quotient_group(inverse: np.ndarray) -> List[np.ndarray]:
    """Elementos de (A⁻¹·Z^r) mod Z^r, gerados pelas colunas de A⁻¹."""
    generators = [_wrap(column) for column in inverse.T]
    zero = np.zeros(inverse.shape[0])
    seen: Dict[Tuple[int, ...], np.ndarray] = {_key(zero): zero}
    pending = [zero]
    while pending:
        current = pending.pop()
        for generator in generators:
            candidate = _wrap(current + generator)
            key = _key(candidate)
            if key not in seen:
                seen[key] = candidate
                pending.append(candidate)
    return list(seen.values())


def _unique_sorted(points: Sequence[np.ndarray]) -> List[np.ndarray]:
    unique: Dict[Tuple[int, ...], np.ndarray] = {}
    for p in points:
        unique.setdefault(_key(p), p)
    return [unique[key] for key in sorted(unique)]


def solve_holonomy(torus: PolarizedTorus, chi: Semicharacter, target: HolonomyTarget) -> List[TorusPoint]:
    """
    Resolve Hol_{L^k}(γ_{p,v_j}) = alvo_j. Nas coordenadas de rede c de p̃ o sistema é linear:

        k·s·(v_jᵀE)·c ≡ arg(alvo_j)/2π + k·fase(χ(v_j))  (mod 1)

    Com 2n vetores independentes as soluções formam um conjunto finito com |det A| pontos.
    Com menos vetores a família é amostrada numa malha e UnderdeterminedSystem é levantado.
    """
    dim = 2 * torus.n
    k = target.k
    if not target.vectors:
        points = [lattice.point_from_coords(torus, c) for c in kernel.grid_coordinates(dim, FAMILY_MESH)]
        logger.warning("sistema de holonomia vazio: a família é o toro inteiro")
        raise UnderdeterminedSystem("nenhum vetor prescrito: todo ponto do toro é solução", points)

    M = np.array([v.coords for v in target.vectors], dtype=np.int64)
    rank = len(target.vectors)
    if np.linalg.matrix_rank(M.astype(float)) < rank:
        raise InvalidOption("os vetores do alvo devem ser linearmente independentes")

    A = k * holonomy.calibration_sign() * (M @ torus.E)
    b = np.array([
        np.angle(complex(t)) / (2.0 * math.pi) + k * float(lattice.chi_phase(chi, torus, v.coords))
        for v, t in zip(target.vectors, target.targets)
    ])

    if rank == dim:
        inverse = np.linalg.inv(A.astype(float))
        base = inverse @ b
        raw = [_wrap(base + g) for g in _quotient_group(inverse)]
    else:
        B, U = lattice.column_reduce(A.tolist())
        inverse = np.linalg.inv(np.array(B, dtype=float))
        U = np.array(U, dtype=float)
        head = inverse @ b
        free = kernel.grid_coordinates(dim - rank, FAMILY_MESH)
        raw = [
            _wrap(U @ np.concatenate([head + g, tail]))
            for g in _quotient_group(inverse)
            for tail in free
        ]

    points = [lattice.point_from_coords(torus, c) for c in _unique_sorted(raw)]
    for p in points:
        for v, t in zip(target.vectors, target.targets):
            error = abs(holonomy.hol_closed(torus, chi, k, p, v).value - complex(t))
            if error > HOLONOMY_TOL:
                raise InconsistentSystem(f"a solução {p.key()} erra a holonomia de {v.coords} por {error:.2e}")

    if rank < dim:
        logger.warning("sistema de holonomia subdeterminado: %d vetores em dimensão real %d", rank, dim)
        raise UnderdeterminedSystem(
            f"{rank} vetores não determinam o ponto em dimensão real {dim}; família amostrada em malha {FAMILY_MESH}",
            points,
        )
    return points


def _solutions(torus: PolarizedTorus, chi: Semicharacter, target: HolonomyTarget) -> List[TorusPoint]:
    try:
        return solve_holonomy(torus, chi, target)
    except UnderdeterminedSystem as exc:
        return exc.points


def _predictions(torus: PolarizedTorus, chi: Semicharacter, k: int, kind: str, first: List[LatticeVector]) -> List[TorusPoint]:
    """
    Pontos previstos pela holonomia de L^k.

    Máximo: Hol = 1 numa base de Λ junto com Hol = 1 nos vetores independentes de S1.
    O segundo conjunto contém o primeiro e é o que controla a localização com raio
    exp((k/4)(l1² − l2²)). Quando S1 não gera Λ ele é uma família contínua, representada
    pelos pontos da malha de `solve_holonomy`, e a distância relatada é só uma cota superior.
    Mínimo: Hol = −1 nos vetores independentes de S1.
    """
    dim = 2 * torus.n
    shell = lattice.independent_subset(first)
    if kind == "min":
        return _solutions(torus, chi, HolonomyTarget(vectors=tuple(shell), targets=(-1.0 + 0j,) * len(shell), k=k))
    basis = tuple(lattice.lattice_vector(torus, np.eye(dim, dtype=int)[i]) for i in range(dim))
    points = _solutions(torus, chi, HolonomyTarget(vectors=basis, targets=(1.0 + 0j,) * dim, k=k))
    points += _solutions(torus, chi, HolonomyTarget(vectors=tuple(shell), targets=(1.0 + 0j,) * len(shell), k=k))
    return points


def _check_hypothesis(torus: PolarizedTorus, k: int, first: List[LatticeVector]) -> bool:
    for u in first:
        for v in first:
            if (k * int(np.array(u.coords) @ torus.E @ np.array(v.coords))) % 2:
                logger.warning("Im H(u, v) não é par em S1: a localização dos extremos é apenas exploratória")
                return False
    return True


def _refine(series: kernel.LoopSeries, grid: GridField, kind: str, refine_iters: int) -> List[Tuple[np.ndarray, float]]:
    """
    Refina cada célula da malha a menos de TIE_TOL do ótimo: Nelder–Mead a partir de um simplex
    do tamanho de meia célula, depois BFGS com o gradiente analítico. Fica o melhor dos dois.
    """
    sign = -1.0 if kind == "max" else 1.0
    scale = float(series.weights.max()) if len(series.weights) else 1.0

    def objective(c):
        return sign * float(series.oscillation(c)[0]) / scale

    def gradient(c):
        return sign * series.oscillation_gradient(c) / scale

    optimum = grid.max if kind == "max" else grid.min
    candidates = np.flatnonzero(np.abs(grid.rho - optimum) <= TIE_TOL)
    if len(candidates) > MAX_REFINED:
        logger.info("%d candidatos empatados para %s; refinando os %d primeiros", len(candidates), kind, MAX_REFINED)
    dim = grid.coords.shape[1]
    step = 0.5 / grid.resolution
    found = []
    for index in candidates[:MAX_REFINED]:
        start = grid.coords[index]
        simplex = np.vstack([start, start + step * np.eye(dim)])
        coarse = minimize(
            objective, start, method="Nelder-Mead",
            options={"initial_simplex": simplex, "xatol": 1e-12, "fatol": 1e-15, "maxiter": refine_iters},
        )
        polish = minimize(objective, coarse.x, jac=gradient, method="BFGS", options={"gtol": 1e-12, "maxiter": refine_iters})
        best = polish if polish.fun <= coarse.fun else coarse
        found.append(_wrap(best.x))

    unique: List[np.ndarray] = []
    for c in found:
        if all(np.max(np.abs(c - u - np.rint(c - u))) > DEDUP_TOL for u in unique):
            unique.append(c)
    values = series.evaluate(np.array(unique))
    return list(zip(unique, (float(v) for v in values)))


def _report(
    torus: PolarizedTorus, kind: str, located: List[Tuple[np.ndarray, float]], predictions: List[TorusPoint], radius_bound: float
) -> ExtremumReport:
    best = max(v for _, v in located) if kind == "max" else min(v for _, v in located)
    optimal = sorted((c for c, v in located if abs(v - best) <= TIE_TOL), key=tuple)
    primary = optimal[0]
    others = [list(map(float, c)) for c in optimal[1:]]
    value = next(v for c, v in located if c is primary)
    location = lattice.point_from_coords(torus, primary)
    distances = [lattice.torus_distance(torus, location, p) for p in predictions]
    nearest = int(np.argmin(distances))
    report = ExtremumReport(
        kind=kind,
        location=[float(c) for c in primary],
        value=value,
        predicted=[float(c) for c in predictions[nearest].coords],
        distance=float(distances[nearest]),
        radius_bound=radius_bound,
        others=others,
    )
    logger.info("%s em %s (valor %.12g), distância %.3e da previsão", kind, report.location, value, report.distance)
    return report


def _locate(
    torus: PolarizedTorus, chi: Semicharacter, k: int, kinds: Sequence[str], res: int, refine_iters: int, threads: Optional[int]
) -> List[ExtremumReport]:
    if res < 16:
        raise InvalidOption("find_extrema exige res ≥ 16")
    series = kernel.prepare_series(torus, chi, k, REFINE_EPS)
    grid = kernel.rho_grid(torus, chi, k, res, REFINE_EPS, threads)
    l1, l2, first = lattice.shells(torus)
    _check_hypothesis(torus, k, first)
    radius_bound = math.exp(0.25 * k * (l1 * l1 - l2 * l2))
    return [
        _report(torus, kind, _refine(series, grid, kind, refine_iters), _predictions(torus, chi, k, kind, first), radius_bound)
        for kind in kinds
    ]


def find_extrema(
    torus: PolarizedTorus,
    chi: Semicharacter,
    k: int,
    res: int = 32,
    refine_iters: int = 200,
    threads: Optional[int] = None,
) -> Tuple[ExtremumReport, ExtremumReport]:
    """
    Máximo e mínimo de ρ_k: varredura da malha, refinamento e distância às previsões por holonomia
    (alvos 1 numa base de Λ para o máximo, −1 em S1 para o mínimo).
    """
    maximum, minimum = _locate(torus, chi, k, ("max", "min"), res, refine_iters, threads)
    return maximum, minimum


def localization_sweep(
    torus: PolarizedTorus,
    chi: Semicharacter,
    k_values: Sequence[int],
    res: int = 32,
    refine_iters: int = 200,
    threads: Optional[int] = None,
) -> List[LocalizationRow]:
    """Tabela k, distância do máximo à previsão, exp((k/4)(l1² − l2²)) e a razão entre as duas."""
    rows = []
    for k in k_values:
        (report,) = _locate(torus, chi, k, ("max",), res, refine_iters, threads)
        rows.append(LocalizationRow(k=k, dist=report.distance, bound=report.radius_bound, ratio=report.distance / report.radius_bound))
    return rows


def pushforward_recover(
    torus: PolarizedTorus,
    chi: Semicharacter,
    k: int,
    v1,
    samples: int = 256,
    basepoint: Optional[Sequence[float]] = None,
    eps: Optional[float] = None,
) -> RecoveryResult:
    """
    Recupera a fase k·α_{v1}(p) integrando ρ_k nas fibras da projeção X → R/Z cujas fibras
    são as translações de U = {u : Im H(v1, u) = 0}.

    Com a·c = (v1ᵀE)·c e A·U = [g | 0], a coordenada c'_1 de c = U·c' é o círculo quociente.
    O perfil ν·média_fibra((2π/k)^n·ρ_k − 1) vale 2ν·Σ_{m≥1} e^{-(k/4)m²ℓ(v1)²}·cos 2πm(λt + φ),
    com λ = k·s·g; φ sai do coeficiente de Fourier de frequência |λ|.
    """
    if torus.n not in (1, 2):
        raise InvalidOption("pushforward_recover só está disponível para n = 1 ou 2")
    coords = tuple(int(c) for c in (v1.coords if isinstance(v1, LatticeVector) else v1))
    if math.gcd(*coords) != 1:
        raise InvalidOption("v1 deve ser um vetor primitivo da rede")
    dim = 2 * torus.n
    vector = lattice.lattice_vector(torus, coords)
    a = np.array(coords, dtype=np.int64) @ torus.E
    B, U = lattice.column_reduce([a.tolist()])
    g = B[0][0]
    U = np.array(U, dtype=float)
    fiber_gram = (U.T @ torus.gram @ U)[1:, 1:]
    nu = math.sqrt(abs(np.linalg.det(fiber_gram)))

    series = kernel.prepare_series(torus, chi, k, config.DEFAULT_EPS if eps is None else eps)
    fiber = kernel.grid_coordinates(dim - 1, samples if torus.n == 1 else FIBER_RES_ND)
    t = np.arange(samples) / samples
    profile = np.empty(samples)
    for i, ti in enumerate(t):
        lifted = np.column_stack([np.full(len(fiber), ti), fiber]) @ U.T
        profile[i] = nu * float(np.mean(series.oscillation(lifted)))

    frequency = k * holonomy.calibration_sign() * g
    if 2 * abs(frequency) >= samples:
        raise InvalidOption(f"samples={samples} insuficiente para a frequência {frequency}")
    coefficient = np.fft.rfft(profile)[abs(frequency)] / samples
    phase = (math.copysign(1.0, frequency) * np.angle(coefficient) / (2.0 * math.pi)) % 1.0
    amplitude = 2.0 * abs(coefficient)
    expected = 2.0 * nu * math.exp(-0.25 * k * vector.length ** 2)

    model = np.zeros(samples)
    m = 1
    while True:
        weight = math.exp(-0.25 * k * m * m * vector.length ** 2)
        if weight < 1e-17:
            break
        model += 2.0 * nu * weight * np.cos(2.0 * math.pi * m * (frequency * t + phase))
        m += 1
    residual = float(np.max(np.abs(profile - model)))
    if residual > 1e-6 * amplitude:
        raise FitResidualTooLarge(f"resíduo do ajuste {residual:.2e} > 1e-6 × amplitude {amplitude:.3e}")

    if basepoint is not None:
        offset = np.linalg.solve(U, np.asarray(basepoint, dtype=float))[0]
        phase = (phase + frequency * offset) % 1.0
    if phase >= 1.0:
        phase = 0.0
    logger.info("pushforward v1=%s: φ=%.12f, λ=%d, amplitude %.6g (esperada %.6g)", coords, phase, frequency, amplitude, expected)
    return RecoveryResult(
        phase=float(phase),
        frequency=int(frequency),
        amplitude=amplitude,
        expected_amplitude=expected,
        fiber_volume=nu,
        residual=residual,
    )


def _circular_gap(x: float, y: float) -> float:
    gap = (x - y) % 1.0
    return min(gap, 1.0 - gap)


def compare_bundles(
    torus: PolarizedTorus,
    chi: Semicharacter,
    chi_other: Semicharacter,
    k: int,
    res: int = 32,
    samples: int = 256,
    eps: Optional[float] = None,
    threads: Optional[int] = None,
) -> CompareReport:
    """
    Compara ρ_k de (L, χ) e (L, χ') numa malha. Se as densidades coincidem até as caudas certificadas,
    recupera as holonomias de L^k por push-forward em cada vetor da base e exige que concordem.
    """
    first = kernel.rho_grid(torus, chi, k, res, eps, threads)
    second = kernel.rho_grid(torus, chi_other, k, res, eps, threads)
    diff = np.abs(first.rho - second.rho)
    worst = int(np.argmax(diff))
    threshold = (first.tail + second.tail) * first.prefactor + 1e-12
    if diff[worst] > threshold:
        return CompareReport(
            verdict="distinct",
            max_diff=float(diff[worst]),
            threshold=threshold,
            witness=[float(c) for c in first.coords[worst]],
        )

    recovered = []
    for i in range(2 * torus.n):
        unit = tuple(int(i == j) for j in range(2 * torus.n))
        phi = pushforward_recover(torus, chi, k, unit, samples, eps=eps).phase
        phi_other = pushforward_recover(torus, chi_other, k, unit, samples, eps=eps).phase
        recovered.append((phi, phi_other))
    agree = all(_circular_gap(x, y) < 1e-6 for x, y in recovered)
    if not agree:
        logger.warning("densidades iguais mas holonomias recuperadas diferentes: %s", recovered)
    return CompareReport(
        verdict="isomorphic_power" if agree else "distinct",
        max_diff=float(diff[worst]),
        threshold=threshold,
        recovered=recovered,
    )

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from multiprocessing.pool import ThreadPool
from typing import Optional, Tuple

import numpy as np

from app import config
from app.exceptions import InvalidOption, QuadratureUnconverged
from app.models.torus import PolarizedTorus, Semicharacter, TorusPoint
from app.schemas.results import GridField, SeriesResult
from app.src import holonomy, lattice

logger = logging.getLogger(__name__)

# termos da cauda abaixo deste valor são desprezados (≈ ln 1e300)
_TAIL_LOG_FLOOR = 690.8


@lru_cache(maxsize=64)
def _shortest(torus: PolarizedTorus) -> float:
    l1, _, _ = lattice.shells(torus)
    return l1


def prefactor(torus: PolarizedTorus, k: int) -> float:
    return (k / (2.0 * math.pi)) ** torus.n


def tail_bound(torus: PolarizedTorus, R: float, k: int) -> float:
    """
    Cota rigorosa de Σ_{ℓ(v) > R} e^{-(k/4)ℓ(v)²}.

    Cada camada (R + j, R + j + 1] contribui no máximo e^{-(k/4)(R+j)²}·Cnt(R + j + 1),
    com Cnt(T) = (1 + 2T/l1)^{2n} vindo do empacotamento de bolas de raio l1/2.
    A mesma cota vale para somas sobre um reticulado transladado.
    """
    l1 = _shortest(torus)
    dim = 2 * torus.n
    total = 0.0
    j = 0
    while True:
        r = R + j
        log_term = -0.25 * k * r * r + dim * math.log1p(2.0 * (r + 1.0) / l1)
        if log_term < -_TAIL_LOG_FLOOR and 0.25 * k * r * r > _TAIL_LOG_FLOOR:
            break
        total += math.exp(log_term)
        j += 1
    return total


def truncation_radius(torus: PolarizedTorus, k: int, eps: float) -> float:
    """Menor R ≥ l1 (até a precisão da bissecção) com tail_bound(R, k) ≤ eps."""
    if eps <= 0:
        raise InvalidOption("eps deve ser positivo")
    hi = _shortest(torus)
    if tail_bound(torus, hi, k) <= eps:
        return hi
    lo = hi
    while tail_bound(torus, hi, k) > eps:
        lo, hi = hi, 2.0 * hi
    while hi - lo > 1e-9 * hi:
        mid = 0.5 * (lo + hi)
        if tail_bound(torus, mid, k) <= eps:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True, eq=False)
class LoopSeries:
    """
    Série do núcleo preparada para avaliação vetorizada em coordenadas de rede c de p̃:

        ρ_k(c) = (k/2π)^n·(1 + Σ w_v·cos 2π(θ_v + Σ_j slope_vj·c_j))

    Guarda um representante de cada par ±v, com peso 2·e^{-(k/4)ℓ(v)²}.
    θ_v = −k·fase(χ(v)) e slope_v = k·s·(vᵀE), ambos em voltas.
    """
    torus: PolarizedTorus
    k: int
    radius: float
    tail: float
    prefactor: float
    coords: np.ndarray
    weights: np.ndarray
    base: np.ndarray
    slopes: np.ndarray

    @property
    def terms(self) -> int:
        return 2 * len(self.weights)

    def turns(self, points: np.ndarray) -> np.ndarray:
        return (self.base + points @ self.slopes.T) % 1.0

    def oscillation(self, points) -> np.ndarray:
        """Σ w_v·cos(...), a parte de ρ_k/(k/2π)^n que varia com o ponto."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.cos(2.0 * np.pi * self.turns(points)) @ self.weights

    def oscillation_gradient(self, point) -> np.ndarray:
        point = np.asarray(point, dtype=float)
        turns = self.turns(point[None, :])[0]
        return -2.0 * np.pi * ((self.weights * np.sin(2.0 * np.pi * turns)) @ self.slopes)

    def evaluate(self, points) -> np.ndarray:
        return self.prefactor * (1.0 + self.oscillation(points))

    def gradient(self, point) -> np.ndarray:
        return self.prefactor * self.oscillation_gradient(point)

    def result(self, value: float) -> SeriesResult:
        return SeriesResult(
            value=float(value), radius=self.radius, tail=self.tail, terms=self.terms, prefactor=self.prefactor
        )


@lru_cache(maxsize=128)
def prepare_series(torus: PolarizedTorus, chi: Semicharacter, k: int, eps: float) -> LoopSeries:
    """
    Enumera os laços com ℓ(v) ≤ R, R mínimo com cauda ≤ eps. Depende só de (toro, χ, k, eps),
    de modo que avaliações em pontos diferentes usam exatamente os mesmos termos.
    """
    R = truncation_radius(torus, k, eps)
    vectors = lattice.enumerate_within(torus, R)
    half = [v for v in vectors if next(c for c in v.coords if c != 0) > 0]
    dim = 2 * torus.n
    coords = np.array([v.coords for v in half], dtype=float).reshape(-1, dim)
    lengths = np.array([v.length for v in half])
    sign = holonomy.calibration_sign()
    series = LoopSeries(
        torus=torus,
        k=k,
        radius=R,
        tail=tail_bound(torus, R, k),
        prefactor=prefactor(torus, k),
        coords=coords,
        weights=2.0 * np.exp(-0.25 * k * lengths ** 2),
        base=(-k * lattice.chi_phase(chi, torus, coords)) % 1.0 if len(half) else np.zeros(0),
        slopes=k * sign * (coords @ torus.E.astype(float)),
    )
    logger.info("série do núcleo: k=%d, R=%.6g, %d termos, cauda %.3e", k, R, series.terms, series.tail)
    return series


def rho_diag(torus: PolarizedTorus, chi: Semicharacter, k: int, p: TorusPoint, eps: Optional[float] = None) -> SeriesResult:
    """
    ρ_k(p) = (k/2π)^n·(1 + Σ_{v ≠ 0} e^{-(k/4)ℓ(v)²}·cos(2π·k·α_v(p))), truncada em ℓ(v) ≤ R.
    """
    eps = config.DEFAULT_EPS if eps is None else eps
    series = prepare_series(torus, chi, k, eps)
    return series.result(series.evaluate(p.coords)[0])


def rho_gradient(torus: PolarizedTorus, chi: Semicharacter, k: int, p: TorusPoint, eps: Optional[float] = None) -> np.ndarray:
    """Gradiente analítico da série truncada em relação às coordenadas de rede de p̃."""
    eps = config.DEFAULT_EPS if eps is None else eps
    return prepare_series(torus, chi, k, eps).gradient(p.coords)


def grid_coordinates(dim: int, resolution: int) -> np.ndarray:
    axis = np.arange(resolution) / resolution
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, dim)


def rho_grid(
    torus: PolarizedTorus,
    chi: Semicharacter,
    k: int,
    resolution: int,
    eps: Optional[float] = None,
    threads: Optional[int] = None,
) -> GridField:
    """
    Amostra ρ_k na malha (i_1/res, ..., i_2n/res). A malha é cortada em blocos de tamanho fixo,
    avaliados num pool de threads; o resultado não depende do número de threads.
    """
    if resolution < 2:
        raise InvalidOption("a resolução da malha deve ser ≥ 2")
    eps = config.DEFAULT_EPS if eps is None else eps
    series = prepare_series(torus, chi, k, eps)
    coords = grid_coordinates(2 * torus.n, resolution)
    chunk = max(1, config.GRID_CHUNK)
    blocks = [coords[start:start + chunk] for start in range(0, len(coords), chunk)]
    with ThreadPool(processes=config.get_threads(threads)) as pool:
        values = pool.map(series.evaluate, blocks)
    logger.debug("rho_grid: %d pontos em %d blocos", len(coords), len(blocks))
    return GridField(
        resolution=resolution,
        coords=coords,
        rho=np.concatenate(values),
        tail=series.tail,
        prefactor=series.prefactor,
    )


def integral_check(
    torus: PolarizedTorus,
    chi: Semicharacter,
    k: int,
    res: int,
    eps: Optional[float] = None,
    threads: Optional[int] = None,
) -> Tuple[float, int]:
    """
    ∫_X ρ_k ω^n/n! pela regra dos retângulos (exata a menos de aliasing para integrando periódico),
    comparada com dim H⁰(X, L^k) = k^n·|Pf(E)|.

    Vol(X) = sqrt(det G) = (2π)^n·|Pf(E)|: no SQ1, G = 2π·I e Vol = 2π, logo Vol·(k/2π) = k.
    Levanta QuadratureUnconverged se res e 2·res discordam em mais de 1e-3·esperado.
    """
    if res < 8:
        raise InvalidOption("integral_check exige res ≥ 8")
    expected = k ** torus.n * lattice.pfaffian(torus.E)
    vol = lattice.volume(torus)
    coarse = vol * rho_grid(torus, chi, k, res, eps, threads).mean
    fine = vol * rho_grid(torus, chi, k, 2 * res, eps, threads).mean
    if abs(fine - coarse) > 1e-3 * expected:
        raise QuadratureUnconverged(
            f"integral não convergiu: {coarse:.10g} (res {res}) vs {fine:.10g} (res {2 * res})"
        )
    logger.info("integral_check: %.12g (esperado %d)", fine, expected)
    return fine, expected


def offdiag_bound(
    torus: PolarizedTorus, k: int, x: TorusPoint, y: TorusPoint, eps: Optional[float] = None
) -> SeriesResult:
    """
    Cota de |K_k(x, y)|: (k/2π)^n·Σ_v e^{-(k/4)ℓ(x̃ − ỹ + v)²}, um termo por segmento geodésico de x a y.
    """
    eps = config.DEFAULT_EPS if eps is None else eps
    R = truncation_radius(torus, k, eps)
    center = np.asarray(x.coords, dtype=float) - np.asarray(y.coords, dtype=float)
    center = center - np.floor(center)
    coords, lengths = lattice.enumerate_shifted(torus, center, R)
    pref = prefactor(torus, k)
    value = pref * float(np.sum(np.exp(-0.25 * k * lengths ** 2)))
    return SeriesResult(value=value, radius=R, tail=tail_bound(torus, R, k), terms=len(coords), prefactor=pref)


def tcz_leading_check(
    torus: PolarizedTorus, chi: Semicharacter, k: int, res: int = 16, eps: Optional[float] = None
) -> Tuple[float, float]:
    """
    Limite de Poisson: max_p |(2π/k)^n·ρ_k(p) − 1| comparado com 2·#S1·e^{-k·l1²/4}.
    Devolve (desvio, cota).
    """
    l1, _, first = lattice.shells(torus)
    grid = rho_grid(torus, chi, k, res, eps)
    deviation = float(np.max(np.abs(grid.rho / grid.prefactor - 1.0)))
    return deviation, 2.0 * len(first) * math.exp(-0.25 * k * l1 * l1)

import logging
import math
from typing import Optional

import numpy as np

from app import config
from app.exceptions import (
    CharacteristicSolveFailed,
    CutoffTooSmall,
    InvalidOption,
    QuadratureUnconverged,
    SingularGram,
)
from app.models.theta import GramMatrix, ThetaBasis
from app.models.torus import PolarizedTorus, Semicharacter, TorusPoint

logger = logging.getLogger(__name__)

CUTOFF_TOL = 1e-14
RESIDUAL_TOL = 1e-9
GRAM_TOL = 1e-8
RESIDUAL_SAMPLES = 20


def torus_for(tau: complex, d: int) -> PolarizedTorus:
    """Toro C/(Z + τZ) com H = [[d/Im τ]]; Im H(1, τ) = −d é inteiro por construção."""
    tau = complex(tau)
    return PolarizedTorus.from_data([[1.0 + 0j], [tau]], [[d / tau.imag]])


def _cutoff_tail(N: int, y: float, M: int) -> float:
    q = math.exp(-math.pi * N * y * M * M)
    return 2.0 * q / (1.0 - math.exp(-2.0 * math.pi * N * y * M))


def default_cutoff(N: int, y: float) -> int:
    return math.ceil(math.sqrt(32.5 / (math.pi * N * y))) + 1


def build_basis(tau: complex, d: int, chi: Semicharacter, k: int, M: Optional[int] = None) -> ThetaBasis:
    """
    Monta as N = k·d funções teta com características resolvidas a partir das fases de χ
    e certifica a equação funcional f(z + λ) = a_k(λ, z)·f(z) em pontos aleatórios.
    """
    tau = complex(tau)
    if tau.imag <= 0:
        raise InvalidOption("Im τ deve ser positivo")
    if d < 1 or k < 1:
        raise InvalidOption("d e k devem ser ≥ 1")
    N = k * d
    y = tau.imag
    M = default_cutoff(N, y) if M is None else M
    tail = _cutoff_tail(N, y, M) if M > 0 else math.inf
    if tail > CUTOFF_TOL:
        raise CutoffTooSmall(f"corte M={M} deixa cauda {tail:.2e} > {CUTOFF_TOL:.0e}")

    phi_1, phi_2 = chi.phases[0], chi.phases[1]
    basis = ThetaBasis(
        tau=tau,
        d=d,
        k=k,
        chi=chi,
        char_offsets=tuple((k * phi_1 + j) / N for j in range(N)),
        shift=-k * phi_2,
        series_cutoff=M,
        torus=torus_for(tau, d),
    )
    residual = functional_residual(basis)
    if residual > RESIDUAL_TOL:
        raise CharacteristicSolveFailed(f"resíduo da equação funcional {residual:.2e} > {RESIDUAL_TOL:.0e}")
    logger.info("base teta: τ=%s, d=%d, k=%d, N=%d, M=%d, resíduo %.2e", tau, d, k, N, M, residual)
    return basis


def theta_values(basis: ThetaBasis, z) -> np.ndarray:
    """
    Valores normalizados F_j(z) = f_j(z)·e^{-(k/2)·πH(z, z)}, uma linha por ponto.
    |F_j|² é Λ-periódica; cada série é somada em torno do seu termo dominante.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex)).reshape(-1)
    tau, N = basis.tau, basis.N
    y = tau.imag
    c = math.pi * N / y
    X, Y = z.real, z.imag
    gauge = c * (-Y * Y + 1j * X * Y)
    offsets = np.arange(-basis.series_cutoff, basis.series_cutoff + 1)
    values = np.empty((len(z), N), dtype=complex)
    for j, a in enumerate(basis.char_offsets):
        center = np.rint(-Y / y - a)
        q = center[:, None] + offsets[None, :] + a
        exponent = (
            gauge[:, None]
            + 1j * math.pi * N * tau * q * q
            + 2j * math.pi * q * (N * z + basis.shift)[:, None]
        )
        values[:, j] = np.exp(exponent).sum(axis=1)
    return values


def functional_residual(basis: ThetaBasis, samples: int = RESIDUAL_SAMPLES, seed: int = 0) -> float:
    """
    max |F(z + λ) − χ(λ)^k·e^{ikπ·Im H(z, λ)}·F(z)| para λ ∈ {1, τ} em pontos aleatórios.
    """
    rng = np.random.default_rng(seed)
    s, t = rng.random(samples), rng.random(samples)
    z = s + t * basis.tau
    h = basis.torus.H[0, 0].real
    base = theta_values(basis, z)
    worst = 0.0
    for phase, lam in zip(basis.chi.phases, (1.0 + 0j, basis.tau)):
        unit = np.exp(2j * math.pi * basis.k * phase + 1j * basis.k * math.pi * h * np.imag(z * np.conj(lam)))
        shifted = theta_values(basis, z + lam)
        worst = max(worst, float(np.max(np.abs(shifted - unit[:, None] * base))))
    return worst


def _gram_at(basis: ThetaBasis, res: int) -> np.ndarray:
    axis = np.arange(res) / res
    s, t = np.meshgrid(axis, axis, indexing="ij")
    F = theta_values(basis, (s + t * basis.tau).reshape(-1))
    return basis.volume * (F.T @ F.conj()) / F.shape[0]


def build_gram(basis: ThetaBasis, res: Optional[int] = None, check: bool = True) -> GramMatrix:
    """
    Matriz de Gram pela regra dos trapézios em coordenadas de rede (integrando periódico).
    Com `check`, compara res e 2·res e exige variação relativa < 1e-8.
    """
    res = config.QUAD_RES if res is None else res
    if res < 2:
        raise InvalidOption("a resolução da quadratura deve ser ≥ 2")
    entries = _gram_at(basis, res)
    change = 0.0
    if check:
        finer = _gram_at(basis, 2 * res)
        change = float(np.max(np.abs(finer - entries)) / np.max(np.abs(finer)))
        if change > GRAM_TOL:
            raise QuadratureUnconverged(f"Gram não convergiu: variação relativa {change:.2e} entre res {res} e {2 * res}")
        entries, res = finer, 2 * res
    entries = 0.5 * (entries + entries.conj().T)
    try:
        np.linalg.cholesky(entries)
        inverse = np.linalg.inv(entries)
    except np.linalg.LinAlgError as exc:
        raise SingularGram(f"matriz de Gram singular: {exc}") from exc
    if np.linalg.cond(entries) > 1e12:
        raise SingularGram("matriz de Gram mal condicionada")
    logger.info("Gram %dx%d com res %d, variação %.2e", basis.N, basis.N, res, change)
    return GramMatrix(entries=entries, inverse=inverse, quad_res=res, change=change)


def kernel_matrix(basis: ThetaBasis, gram: GramMatrix, x, y) -> np.ndarray:
    """K(x, y) = Σ_ij (G⁻¹)_ji·F_i(x)·conj(F_j(y)), já com o peso e^{-(k/2)(φ(x)+φ(y))}."""
    Fx = theta_values(basis, x)
    Fy = theta_values(basis, y)
    return np.einsum("pj,ji,pi->p", Fy.conj(), gram.inverse, Fx)


def rho_oracle(basis: ThetaBasis, gram: GramMatrix, p: TorusPoint) -> float:
    """Densidade de Bergman exata |K_k(p, p)|_{h^k}."""
    return float(kernel_matrix(basis, gram, p.lift[0], p.lift[0])[0].real)


def offdiag_oracle(basis: ThetaBasis, gram: GramMatrix, x: TorusPoint, y: TorusPoint) -> float:
    """Norma pontual |K_k(x, y)|_{h^k}."""
    return float(abs(kernel_matrix(basis, gram, x.lift[0], y.lift[0])[0]))

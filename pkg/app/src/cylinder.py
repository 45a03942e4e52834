import cmath
import logging
import math
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from app.exceptions import InvalidOption
from app.models.torus import PolarizedTorus
from app.schemas.cylinder import CylinderParams
from app.src import lattice

logger = logging.getLogger(__name__)

# e^{-35} < 1e-15: meia largura da soma direta em unidades de sqrt(kη²)
_DIRECT_SPREAD = 35.0
# e^{-36.85} < 1e-16: próximo termo desprezado da soma de Poisson
_POISSON_CUT = 36.85


def norm_integral_Ia(params: CylinderParams, a: int) -> float:
    """I_a = ∫_{C*} |z|^{2a}·h_η^k·|z|^{-2𝔪_k}·ω_η = 2πη²·e^{(a−𝔪_k)²/(kη²)}·sqrt(π/(kη²))."""
    width = params.width
    return 2.0 * math.pi * params.eta ** 2 * math.exp((a - params.m_k) ** 2 / width) * math.sqrt(math.pi / width)


def rho_cyl_direct(params: CylinderParams) -> float:
    """
    Série da base ortogonal {z^a}: h_η^k|z|^{-2𝔪_k}·Σ_a |z|^{2a}/I_a.
    Os expoentes são combinados em −(a − 𝔪_k − kη²t)²/(kη²) e a soma é feita em torno do pico.
    """
    width = params.width
    center = params.m_k + width * params.t
    spread = math.ceil(math.sqrt(_DIRECT_SPREAD * width)) + 1
    a = np.arange(math.floor(center) - spread, math.ceil(center) + spread + 1, dtype=float)
    total = float(np.sum(np.exp(-((a - center) ** 2) / width)))
    return total * math.sqrt(params.k / math.pi) / (2.0 * math.pi * params.eta)


def rho_cyl_poisson(params: CylinderParams) -> float:
    """
    Forma de Poisson: (k/2π)·Σ_ξ e^{-kη²π²ξ²}·cos(2πξ𝔪_k + 2kη²πξt).
    Os pares ξ, −ξ são somados juntos, a parte imaginária nunca aparece.
    """
    width = params.width
    cutoff = math.ceil(math.sqrt(_POISSON_CUT / (width * math.pi ** 2)))
    xi = np.arange(1, cutoff + 1, dtype=float)
    phases = 2.0 * math.pi * xi * params.m_k + 2.0 * width * math.pi * xi * params.t
    total = 1.0 + 2.0 * float(np.sum(np.exp(-width * math.pi ** 2 * xi ** 2) * np.cos(phases)))
    return params.k / (2.0 * math.pi) * total


def rho_cyl_nd(params: CylinderParams) -> float:
    """
    Cilindro C^{n-1} × C*: as direções transversais contribuem o fator plano (k/2π)^{n-1}.
    """
    return (params.k / (2.0 * math.pi)) ** (params.n - 1) * rho_cyl_poisson(params.circle())


def transverse_moment(a: int, k: int) -> float:
    """∫_C |w|^{2a}·e^{-(k/2)|w|²} dA = 2π·2^a·a!/k^{a+1}."""
    return math.exp(_log_transverse_moment(np.array([a], dtype=float), k)[0])


def _log_transverse_moment(a: np.ndarray, k: int) -> np.ndarray:
    return math.log(2.0 * math.pi) + a * math.log(2.0) + gammaln(a + 1.0) - (a + 1.0) * math.log(k)


def rho_cyl_nd_direct(params: CylinderParams, w_prime: Sequence[complex]) -> float:
    """
    Série da base ortogonal {w'^a·w_n^b} com normas J_{a,b} = I_b·Π_j transverse_moment(a_j, k),
    avaliada no ponto transversal w'. O resultado não depende de w'.
    """
    w_prime = np.atleast_1d(np.asarray(w_prime, dtype=complex))
    if len(w_prime) != params.n - 1:
        raise InvalidOption(f"w' deve ter {params.n - 1} coordenadas")
    factor = 1.0
    for w in w_prime:
        r2 = abs(w) ** 2
        mean = 0.5 * params.k * r2
        top = math.ceil(mean + 12.0 * math.sqrt(mean) + 40.0)
        a = np.arange(top + 1, dtype=float)
        log_power = a * math.log(r2) if r2 > 0 else np.where(a == 0, 0.0, -np.inf)
        logs = log_power - _log_transverse_moment(a, params.k) - mean
        factor *= float(np.sum(np.exp(logs)))
    return factor * rho_cyl_direct(params.circle())


def cyl_holonomy_phase(params: CylinderParams, xi: int) -> complex:
    """Holonomia ao longo do laço geodésico de número de voltas −ξ: e^{-2πiξ𝔪_k − 2ikη²πξt}."""
    return cmath.exp(-2j * math.pi * xi * params.m_k - 2j * params.width * math.pi * xi * params.t)


def cylinder_coordinates(torus: PolarizedTorus, v, lift) -> Tuple[float, float]:
    """
    (η, t) do ponto z ∈ C^n no cilindro C^n/<v>: após a rotação para a forma normal v ↦ (0, ..., i·a),
    t = log|w_n| = (2π/a)·Re z_n e η = a/2π.
    """
    rotation, eta = lattice.normal_form_rotation(torus, v)
    image = rotation @ np.atleast_1d(np.asarray(lift, dtype=complex))
    return eta, float(image[-1].real / eta)


def sweep(params: CylinderParams, t_values: Iterable[float]) -> List[Tuple[float, float, float, float]]:
    """Linhas (t, ρ direto, ρ de Poisson, |diferença|) para a saída CSV."""
    flat = (params.k / (2.0 * math.pi)) ** (params.n - 1)
    rows = []
    for t in t_values:
        point = params.at(t)
        direct = flat * rho_cyl_direct(point.circle())
        poisson = rho_cyl_nd(point)
        rows.append((float(t), direct, poisson, abs(direct - poisson)))
    logger.info("sweep do cilindro: %d valores de t, max |diferença| %.3e", len(rows), max((r[3] for r in rows), default=0.0))
    return rows

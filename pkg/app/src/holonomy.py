import cmath
import logging
import math
import threading
from typing import Optional

from app.exceptions import ModulusMismatch, StepCountTooSmall
from app.models.torus import LatticeVector, PolarizedTorus, Semicharacter, TorusPoint
from app.schemas.results import CalibrationReport, HolonomyResult
from app.src import lattice

logger = logging.getLogger(__name__)

MIN_STEPS = 100
MODULUS_TOL = 1e-6

_calibration: Optional[CalibrationReport] = None
_calibration_lock = threading.Lock()


def _closed_value(torus: PolarizedTorus, chi: Semicharacter, k: int, p: TorusPoint, v: LatticeVector, sign: int) -> complex:
    """χ(v)^{-k}·exp(2πi·k·sign·E(v, p̃)), com a fase calculada em voltas para não perder precisão."""
    turns = -k * float(lattice.chi_phase(chi, torus, v.coords)) + k * sign * torus.riemann(v.embedding, p.lift)
    return cmath.exp(2j * math.pi * (turns % 1.0))


def _log_automorphy(torus: PolarizedTorus, chi: Semicharacter, k: int, p: TorusPoint, v: LatticeVector) -> complex:
    """log a_k(v, p̃) = 2πi·k·fase(χ(v)) + kπ·H(p̃, v) + (kπ/2)·H(v, v)."""
    return (
        2j * math.pi * k * float(lattice.chi_phase(chi, torus, v.coords))
        + k * math.pi * torus.h(p.lift, v.embedding)
        + 0.5 * k * math.pi * torus.h(v.embedding, v.embedding)
    )


def _transport(torus: PolarizedTorus, k: int, p: TorusPoint, v: LatticeVector, steps: int) -> complex:
    """
    Integra u' = u·kπ·H(v, p̃ + t·v) em [0, 1], u(0) = 1, com Runge–Kutta clássico de quarta ordem.
    O módulo de u cresce como |a_k(v, p̃)|; quem cancela esse crescimento é `_ode_value`.
    """
    base = torus.h(v.embedding, p.lift)
    drift = torus.h(v.embedding, v.embedding)

    def rate(t: float, u: complex) -> complex:
        return u * k * math.pi * (base + t * drift)

    u = 1.0 + 0j
    dt = 1.0 / steps
    for i in range(steps):
        t = i * dt
        k1 = rate(t, u)
        k2 = rate(t + 0.5 * dt, u + 0.5 * dt * k1)
        k3 = rate(t + 0.5 * dt, u + 0.5 * dt * k2)
        k4 = rate(t + dt, u + dt * k3)
        u += dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    return u


def _ode_value(torus: PolarizedTorus, chi: Semicharacter, k: int, p: TorusPoint, v: LatticeVector, steps: int) -> complex:
    if steps < MIN_STEPS:
        raise StepCountTooSmall(f"steps deve ser ≥ {MIN_STEPS} (recebido {steps})")
    if v.is_zero:
        return 1.0 + 0j
    ratio = _transport(torus, k, p, v, steps) * cmath.exp(-_log_automorphy(torus, chi, k, p, v))
    residual = abs(abs(ratio) - 1.0)
    if residual > MODULUS_TOL:
        raise ModulusMismatch(
            f"o módulo do transporte não cancela o fator de automorfia (resíduo {residual:.3e})"
        )
    return ratio / abs(ratio)


def calibration() -> CalibrationReport:
    """
    Escolhe o sinal s da forma fechada comparando as duas candidatas com o transporte paralelo
    numa instância de referência (SQ1, k = 1, p̃ = 1/4, v = i). Calculado uma única vez.
    """
    global _calibration
    with _calibration_lock:
        if _calibration is None:
            torus = PolarizedTorus.from_data([[1.0], [1j]], [[1.0]])
            chi = Semicharacter.trivial(2)
            p = lattice.point_from_lift(torus, [0.25])
            v = lattice.lattice_vector(torus, (0, 1))
            reference = _ode_value(torus, chi, 1, p, v, 2000)
            plus = abs(_closed_value(torus, chi, 1, p, v, 1) - reference)
            minus = abs(_closed_value(torus, chi, 1, p, v, -1) - reference)
            _calibration = CalibrationReport(
                sign=1 if plus <= minus else -1, residual_plus=plus, residual_minus=minus
            )
            logger.info(
                "calibração do sinal da holonomia: s=%+d (resíduos %.2e / %.2e)",
                _calibration.sign, plus, minus,
            )
    return _calibration


def calibration_sign() -> int:
    return calibration().sign


def hol_closed(torus: PolarizedTorus, chi: Semicharacter, k: int, p: TorusPoint, v: LatticeVector) -> HolonomyResult:
    """
    Hol_{L^k}(γ_{p,v}) = χ(v)^{-k}·exp(2πi·k·s·E(v, p̃)).
    Não depende do levantamento p̃: E(v, u) é inteiro para u ∈ Λ.
    """
    if v.is_zero:
        return HolonomyResult.from_value(1.0, "closed_form")
    return HolonomyResult.from_value(_closed_value(torus, chi, k, p, v, calibration_sign()), "closed_form")


def hol_ode(torus: PolarizedTorus, chi: Semicharacter, k: int, p: TorusPoint, v: LatticeVector, steps: int = 2000) -> HolonomyResult:
    """
    Holonomia pelo transporte paralelo da conexão de Chern ao longo de t ↦ p̃ + t·v,
    seguido do fator de automorfia inverso a_k(v, p̃)^{-1}.
    """
    return HolonomyResult.from_value(_ode_value(torus, chi, k, p, v, steps), "ode")


def alpha_series_coeff(torus: PolarizedTorus, chi: Semicharacter, k: int, p: TorusPoint, v: LatticeVector) -> float:
    """cos(2π·k·α_v(p)), o coeficiente do termo de v na série do núcleo."""
    return hol_closed(torus, chi, k, p, v).real


def displacement(torus: PolarizedTorus, k: int, v: LatticeVector, u: LatticeVector, d: float) -> float:
    """
    Variação prevista de α_u (fase de Hol_{L^k}) ao andar a distância geodésica d ao longo de γ_{p,v}:
    −(d/ℓ(v))·E(v, u)·k·s.
    """
    if v.length == 0.0:
        return 0.0
    return -(d / v.length) * torus.riemann(v.embedding, u.embedding) * k * calibration_sign()

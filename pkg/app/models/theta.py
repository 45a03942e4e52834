from dataclasses import dataclass
from typing import Tuple

import numpy as np

from app.models.torus import PolarizedTorus, Semicharacter


@dataclass(frozen=True, eq=False)
class ThetaBasis:
    """
    Base de H⁰(X, L^k) para X = C/(Z + τZ) com polarização de grau d, N = k·d funções:

        f_j(z) = exp(kπd·z²/(2·Im τ))·Σ_m exp(πiNτ(m + a_j)² + 2πi(m + a_j)(Nz + b))

    com a_j = (k·φ_1 + j)/N e b = −k·φ_2, onde φ são as fases de χ em (1, τ).
    """
    tau: complex
    d: int
    k: int
    chi: Semicharacter
    char_offsets: Tuple[float, ...]
    shift: float
    series_cutoff: int
    torus: PolarizedTorus

    @property
    def N(self) -> int:
        return self.k * self.d

    @property
    def volume(self) -> float:
        return 2.0 * np.pi * self.d


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """G[i][j] = ∫ f_i·conj(f_j)·e^{-kφ} dVol, com a inversa calculada uma vez."""
    entries: np.ndarray
    inverse: np.ndarray
    quad_res: int
    change: float

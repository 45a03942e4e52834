from dataclasses import dataclass, field
from typing import Tuple

import numpy as np


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PolarizedTorus:
    """
    Toro complexo polarizado X = C^n / Λ.

    `basis` tem uma linha por vetor λ_i (2n linhas, n colunas complexas).
    H(u, w) = Σ H_ij u_i conj(w_j) é linear no primeiro argumento.
    `E` guarda os inteiros arredondados de Im H(λ_i, λ_j); `E_raw` guarda os valores em ponto flutuante.
    `gram` é a matriz real G_ij = 2π Re H(λ_i, λ_j), cujo quadrado de norma é o comprimento geodésico ℓ².
    """
    n: int
    basis: np.ndarray
    H: np.ndarray
    E: np.ndarray
    E_raw: np.ndarray
    gram: np.ndarray
    real_basis: np.ndarray

    @classmethod
    def from_data(cls, basis, H) -> "PolarizedTorus":
        """
        Monta o toro a partir da base e da forma hermitiana, sem validar.
        A validação fica em `app.src.lattice.validate`.
        """
        basis = np.asarray(basis, dtype=complex)
        if basis.ndim == 1:
            basis = basis.reshape(-1, 1)
        H = np.atleast_2d(np.asarray(H, dtype=complex))
        n = H.shape[0]
        E_raw = np.imag(basis @ H @ basis.conj().T)
        gram = 2.0 * np.pi * np.real(basis @ H @ basis.conj().T)
        # coluna i = (Re λ_i, Im λ_i)
        real_basis = np.vstack([basis.real.T, basis.imag.T])
        return cls(
            n=n,
            basis=_frozen(basis),
            H=_frozen(H),
            E=_frozen(np.rint(E_raw).astype(np.int64)),
            E_raw=_frozen(E_raw),
            gram=_frozen(gram),
            real_basis=_frozen(real_basis),
        )

    def h(self, u, w) -> complex:
        return complex(np.asarray(u, dtype=complex) @ self.H @ np.conj(np.asarray(w, dtype=complex)))

    def riemann(self, u, w) -> float:
        """E(u, w) = Im H(u, w), estendida de forma R-bilinear."""
        return self.h(u, w).imag


@dataclass(frozen=True, eq=False)
class LatticeVector:
    coords: Tuple[int, ...]
    embedding: np.ndarray
    length: float

    @property
    def is_zero(self) -> bool:
        return not any(self.coords)


@dataclass(frozen=True)
class Semicharacter:
    """
    Semicaráter χ guardado pelas fases na base: χ(λ_i) = exp(2πi·phases[i]).
    """
    phases: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(float(p) % 1.0 for p in self.phases))

    @classmethod
    def trivial(cls, rank: int) -> "Semicharacter":
        return cls(tuple(0.0 for _ in range(rank)))


@dataclass(frozen=True, eq=False)
class TorusPoint:
    lift: np.ndarray
    coords: np.ndarray = field(default=None)

    def key(self) -> Tuple[float, ...]:
        return tuple(float(c) for c in self.coords)


@dataclass(frozen=True, eq=False)
class HolonomyTarget:
    """
    Valores prescritos de Hol_{L^k}(γ_{p,v}) para alguns vetores v da rede.
    """
    vectors: Tuple[LatticeVector, ...]
    targets: Tuple[complex, ...]
    k: int

    def __post_init__(self):
        if len(self.vectors) != len(self.targets):
            raise ValueError("cada vetor precisa de um alvo")
        if any(abs(abs(complex(t)) - 1.0) > 1e-12 for t in self.targets):
            raise ValueError("os alvos de holonomia devem ter módulo 1")

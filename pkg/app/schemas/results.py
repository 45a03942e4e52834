import csv
from typing import List, Literal, Optional, TextIO, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


def fmt(value: float) -> str:
    """Formato fixo dos artefatos CSV: 17 algarismos significativos."""
    return f"{float(value):.17g}"


class ValidationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    positive_definite: bool
    min_eigenvalue: float
    integrality_residual: float
    rank_E: int
    pfaffian: Optional[int] = None
    E: List[List[int]]


class SeriesResult(BaseModel):
    """
    Resultado de uma série truncada: valor, raio de truncamento, cauda rigorosa e número de termos.
    A cauda não inclui o prefator (k/2π)^n.
    """
    model_config = ConfigDict(frozen=True)

    value: float
    radius: float
    tail: float = Field(..., ge=0.0)
    terms: int
    prefactor: float = 1.0

    def enclosure(self) -> Tuple[float, float]:
        width = self.tail * self.prefactor
        return self.value - width, self.value + width


class HolonomyResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    real: float
    imag: float
    alpha: float = Field(..., ge=0.0, lt=1.0)
    method: Literal["closed_form", "ode"]

    @property
    def value(self) -> complex:
        return complex(self.real, self.imag)

    @classmethod
    def from_value(cls, value: complex, method: str) -> "HolonomyResult":
        value = complex(value)
        value = value / abs(value)
        alpha = (np.angle(value) / (2.0 * np.pi)) % 1.0
        if alpha >= 1.0:
            alpha = 0.0
        return cls(real=value.real, imag=value.imag, alpha=alpha, method=method)


class CalibrationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    sign: Literal[1, -1]
    residual_plus: float
    residual_minus: float


class ExtremumReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["max", "min"]
    location: List[float]
    value: float
    predicted: List[float]
    distance: float = Field(..., ge=0.0)
    radius_bound: float
    others: List[List[float]] = []


class LocalizationRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    dist: float
    bound: float
    ratio: float


class RecoveryResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    phase: float = Field(..., ge=0.0, lt=1.0)
    frequency: int
    amplitude: float
    expected_amplitude: float
    fiber_volume: float
    residual: float


class CompareReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    verdict: Literal["isomorphic_power", "distinct"]
    max_diff: float
    threshold: float
    witness: Optional[List[float]] = None
    recovered: List[Tuple[float, float]] = []


class GridField(BaseModel):
    """
    Amostras de ρ_k nas coordenadas de rede (i_1/res, ..., i_2n/res), em ordem row-major.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    resolution: int
    coords: np.ndarray
    rho: np.ndarray
    tail: float
    prefactor: float

    @field_validator("coords", "rho")
    @classmethod
    def read_only(cls, value: np.ndarray) -> np.ndarray:
        value = np.array(value, dtype=float)
        value.setflags(write=False)
        return value

    @property
    def argmin(self) -> int:
        return int(np.argmin(self.rho))

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.rho))

    @property
    def min(self) -> float:
        return float(self.rho[self.argmin])

    @property
    def max(self) -> float:
        return float(self.rho[self.argmax])

    @property
    def mean(self) -> float:
        return float(np.mean(self.rho))

    def write_csv(self, stream: TextIO) -> None:
        dim = self.coords.shape[1]
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow([f"coord_{i + 1}" for i in range(dim)] + ["rho", "tail"])
        tail = fmt(self.tail * self.prefactor)
        for point, value in zip(self.coords, self.rho):
            writer.writerow([fmt(c) for c in point] + [fmt(value), tail])

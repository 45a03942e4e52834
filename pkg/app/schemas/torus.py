from typing import Any, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

Pair = Tuple[float, float]


def _to_pair(value: Any) -> Pair:
    """
    Aceita um número complexo escrito como [re, im], {"re": .., "im": ..} ou um real.
    """
    if isinstance(value, dict):
        return (float(value.get("re", 0.0)), float(value.get("im", 0.0)))
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(x, (int, float)) for x in value
    ):
        return (float(value[0]), float(value[1]))
    if isinstance(value, (int, float)):
        return (float(value), 0.0)
    if isinstance(value, complex):
        return (value.real, value.imag)
    raise ValueError(f"número complexo inválido: {value!r}")


class TorusConfig(BaseModel):
    n: int = Field(..., ge=1, description="Dimensão complexa do toro")
    basis: List[List[Pair]] = Field(..., description="2n vetores da rede, cada um com n números complexos")
    H: List[List[Pair]] = Field(..., description="Forma hermitiana positiva n×n")
    chi_phases: Optional[List[float]] = Field(None, description="Fases do semicaráter na base, em [0, 1)")
    k: int = Field(1, ge=1, description="Potência tensorial")

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "n": 1,
                    "basis": [[1.0, 0.0], [0.0, 1.0]],
                    "H": [[{"re": 1.0, "im": 0.0}]],
                    "chi_phases": [0.0, 0.0],
                    "k": 1,
                }
            ]
        }
    }

    @field_validator("basis", mode="before")
    @classmethod
    def parse_basis(cls, value):
        if not isinstance(value, list):
            raise ValueError("basis deve ser uma lista")
        parsed = []
        for vector in value:
            # n = 1: cada vetor pode vir como um único par [re, im]
            try:
                parsed.append([_to_pair(vector)])
                continue
            except ValueError:
                pass
            if not isinstance(vector, list):
                raise ValueError(f"vetor da base inválido: {vector!r}")
            parsed.append([_to_pair(entry) for entry in vector])
        return parsed

    @field_validator("H", mode="before")
    @classmethod
    def parse_hermitian(cls, value):
        if not isinstance(value, list) or not all(isinstance(row, list) for row in value):
            raise ValueError("H deve ser uma lista de linhas")
        return [[_to_pair(entry) for entry in row] for row in value]

    @model_validator(mode="after")
    def check_shapes(self):
        n = self.n
        if len(self.basis) != 2 * n or any(len(v) != n for v in self.basis):
            raise ValueError(f"basis deve ter {2 * n} vetores com {n} coordenadas complexas")
        if len(self.H) != n or any(len(row) != n for row in self.H):
            raise ValueError(f"H deve ser uma matriz {n}×{n}")
        if self.chi_phases is not None and len(self.chi_phases) != 2 * n:
            raise ValueError(f"chi_phases deve ter {2 * n} entradas")
        return self

    def basis_array(self) -> np.ndarray:
        return np.array([[complex(re, im) for re, im in v] for v in self.basis])

    def hermitian_array(self) -> np.ndarray:
        return np.array([[complex(re, im) for re, im in row] for row in self.H])

    def phases(self) -> Tuple[float, ...]:
        if self.chi_phases is None:
            return tuple(0.0 for _ in range(2 * self.n))
        return tuple(self.chi_phases)

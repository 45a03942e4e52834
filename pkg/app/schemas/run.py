from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator

from app import config as settings

Command = Literal["validate", "rho", "grid", "oracle", "compare", "cylinder", "extrema", "rigidity", "offdiag", "hol"]


def _split(value, cast):
    if value is None or isinstance(value, list):
        return value
    return [cast(part) for part in str(value).split(",") if part.strip()]


class RunConfig(BaseModel):
    """
    Opções de uma execução da CLI, validadas antes de qualquer cálculo.
    """
    command: Command
    config: Optional[Path] = None
    out: Optional[Path] = None
    k: Optional[int] = Field(None, ge=1)
    eps: float = Field(settings.DEFAULT_EPS, gt=0.0)
    res: Optional[int] = Field(None, ge=2)
    threads: Optional[int] = None
    point: Optional[List[float]] = None
    point2: Optional[List[float]] = None
    phases: Optional[List[float]] = None
    vector: Optional[List[int]] = None
    steps: int = Field(2000, ge=1)
    eta: float = Field(1.0, gt=0.0)
    alpha: float = Field(0.0, ge=0.0, lt=1.0)
    t_min: float = -1.0
    t_max: float = 1.0
    t_count: int = Field(21, ge=1)
    dim: int = Field(1, ge=1)
    sweep: Optional[str] = None
    samples: int = Field(256, ge=8)
    refine_iters: int = Field(200, ge=1)
    log_level: str = settings.LOG_LEVEL

    @field_validator("point", "point2", "phases", mode="before")
    @classmethod
    def parse_floats(cls, value):
        return _split(value, float)

    @field_validator("vector", mode="before")
    @classmethod
    def parse_ints(cls, value):
        return _split(value, int)

    @field_validator("sweep")
    @classmethod
    def parse_sweep(cls, value):
        if value is None:
            return value
        parts = value.split(":")
        if len(parts) != 2 or not all(p.strip().isdigit() for p in parts) or int(parts[0]) > int(parts[1]):
            raise ValueError("--sweep deve ter a forma K1:K2 com 1 ≤ K1 ≤ K2")
        if int(parts[0]) < 1:
            raise ValueError("--sweep começa em k ≥ 1")
        return value

    @field_validator("log_level")
    @classmethod
    def parse_log_level(cls, value: str) -> str:
        value = value.upper()
        if value not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"nível de log desconhecido: {value}")
        return value

    def sweep_range(self) -> List[int]:
        first, last = (int(p) for p in self.sweep.split(":"))
        return list(range(first, last + 1))

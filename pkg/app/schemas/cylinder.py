import math

from pydantic import BaseModel, ConfigDict, Field


class CylinderParams(BaseModel):
    """
    Parâmetros do cilindro plano torcido C^{n-1} × C*.
    `t` é a coordenada axial log|w_n|; o círculo |w_n| = r tem comprimento 2πη.
    """
    model_config = ConfigDict(frozen=True)

    eta: float = Field(..., gt=0.0)
    alpha: float = Field(0.0, ge=0.0, lt=1.0)
    k: int = Field(1, ge=1)
    t: float = 0.0
    n: int = Field(1, ge=1)

    @property
    def m_k(self) -> float:
        """𝔪_k = kα − ⌊kα⌋."""
        value = self.k * self.alpha
        return value - math.floor(value)

    @property
    def width(self) -> float:
        """kη², a escala gaussiana comum às duas séries."""
        return self.k * self.eta * self.eta

    def at(self, t: float) -> "CylinderParams":
        return self.model_copy(update={"t": float(t)})

    def circle(self) -> "CylinderParams":
        return self.model_copy(update={"n": 1})

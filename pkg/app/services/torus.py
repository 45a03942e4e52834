import json
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from app.exceptions import ConfigParseError, InvalidOption
from app.models.torus import PolarizedTorus, Semicharacter, TorusPoint
from app.schemas.cylinder import CylinderParams
from app.schemas.results import (
    CompareReport,
    ExtremumReport,
    GridField,
    HolonomyResult,
    LocalizationRow,
    RecoveryResult,
    SeriesResult,
    ValidationReport,
)
from app.schemas.torus import TorusConfig
from app.src import cylinder, extrema, holonomy, kernel, lattice, theta

logger = logging.getLogger(__name__)


def ler_configuracao(path: Path) -> TorusConfig:
    """
    Lê o arquivo JSON do toro. Qualquer problema de leitura ou de schema vira ConfigParseError.
    """
    try:
        raw = Path(path).read_text(encoding="utf-8")
        return TorusConfig.model_validate(json.loads(raw))
    except OSError as exc:
        raise ConfigParseError(f"não foi possível ler {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"JSON inválido em {path}: {exc.msg} (linha {exc.lineno})") from exc
    except ValidationError as exc:
        campos = "; ".join(f"{'.'.join(map(str, e['loc'])) or 'raiz'}: {e['msg']}" for e in exc.errors())
        raise ConfigParseError(f"configuração inválida em {path}: {campos}") from exc


class TorusService:
    def __init__(self, torus: PolarizedTorus, chi: Semicharacter, k: int, threads: Optional[int] = None):
        self.torus = torus
        self.chi = chi
        self.k = k
        self.threads = threads

    @classmethod
    def from_config(cls, torus_config: TorusConfig, k: Optional[int] = None, threads: Optional[int] = None) -> "TorusService":
        torus, chi, default_k = lattice.load_torus(torus_config)
        return cls(torus, chi, k or default_k, threads)

    @classmethod
    def from_path(cls, path: Path, k: Optional[int] = None, threads: Optional[int] = None) -> "TorusService":
        return cls.from_config(ler_configuracao(path), k, threads)

    def _ponto(self, coords: Optional[Sequence[float]], nome: str = "--point") -> TorusPoint:
        dim = 2 * self.torus.n
        if coords is None:
            raise InvalidOption(f"{nome} é obrigatório")
        if len(coords) != dim:
            raise InvalidOption(f"{nome} deve ter {dim} coordenadas de rede")
        if any(c < 0.0 or c >= 1.0 for c in coords):
            raise InvalidOption(f"{nome} deve estar em [0, 1)^{dim}")
        return lattice.point_from_coords(self.torus, coords)

    def _semicarater(self, phases: Optional[Sequence[float]]) -> Semicharacter:
        if phases is None or len(phases) != 2 * self.torus.n:
            raise InvalidOption(f"--phases deve ter {2 * self.torus.n} fases")
        return Semicharacter(tuple(phases))

    def validar(self) -> ValidationReport:
        return lattice.validate(self.torus)

    def densidade(self, point: Optional[Sequence[float]], eps: float) -> SeriesResult:
        return kernel.rho_diag(self.torus, self.chi, self.k, self._ponto(point), eps)

    def malha(self, res: int, eps: float) -> GridField:
        return kernel.rho_grid(self.torus, self.chi, self.k, res, eps, self.threads)

    def integral(self, res: int, eps: float) -> Tuple[float, int]:
        return kernel.integral_check(self.torus, self.chi, self.k, res, eps, self.threads)

    def fora_diagonal(self, point, point2, eps: float) -> SeriesResult:
        return kernel.offdiag_bound(self.torus, self.k, self._ponto(point), self._ponto(point2, "--point2"), eps)

    def holonomia(self, point, vector: Optional[Sequence[int]], steps: int) -> Tuple[HolonomyResult, HolonomyResult]:
        if vector is None or len(vector) != 2 * self.torus.n:
            raise InvalidOption(f"--vector deve ter {2 * self.torus.n} coordenadas inteiras")
        p = self._ponto(point)
        v = lattice.lattice_vector(self.torus, vector)
        return (
            holonomy.hol_closed(self.torus, self.chi, self.k, p, v),
            holonomy.hol_ode(self.torus, self.chi, self.k, p, v, steps),
        )

    def dados_oraculo(self) -> Tuple[complex, int]:
        """
        (τ, d) do modelo teta equivalente: z ↦ z/λ_1 leva a base a (1, τ) e H a d/Im τ.
        """
        if self.torus.n != 1:
            raise InvalidOption("o oráculo teta existe apenas para n = 1")
        first, second = self.torus.basis[0, 0], self.torus.basis[1, 0]
        tau = complex(second / first)
        if tau.imag <= 0:
            raise InvalidOption("a base deve ter Im(λ_2/λ_1) > 0 para o oráculo teta")
        return tau, lattice.pfaffian(self.torus.E)

    def oraculo(self, res: int, eps: float, quad_res: Optional[int] = None) -> List[Tuple[float, float, float, float, float]]:
        """
        Linhas x1, x2, ρ pela série de laços, ρ pelo oráculo teta, |diferença| numa malha res × res.
        """
        tau, d = self.dados_oraculo()
        basis = theta.build_basis(tau, d, self.chi, self.k)
        gram = theta.build_gram(basis, quad_res)
        rows = []
        for x1, x2 in kernel.grid_coordinates(2, res):
            exact = kernel.rho_diag(self.torus, self.chi, self.k, lattice.point_from_coords(self.torus, (x1, x2)), eps).value
            lift = lattice.point_from_coords(basis.torus, (x1, x2))
            reference = theta.rho_oracle(basis, gram, lift)
            rows.append((float(x1), float(x2), exact, reference, abs(exact - reference)))
        return rows

    def comparar(self, phases: Optional[Sequence[float]], res: int, samples: int, eps: float) -> CompareReport:
        return extrema.compare_bundles(
            self.torus, self.chi, self._semicarater(phases), self.k, res, samples, eps, self.threads
        )

    def extremos(self, res: int, refine_iters: int) -> Tuple[ExtremumReport, ExtremumReport]:
        if res < 16:
            raise InvalidOption("extrema exige --res ≥ 16")
        return extrema.find_extrema(self.torus, self.chi, self.k, res, refine_iters, self.threads)

    def localizacao(self, k_values: Sequence[int], res: int, refine_iters: int) -> List[LocalizationRow]:
        if res < 16:
            raise InvalidOption("extrema exige --res ≥ 16")
        return extrema.localization_sweep(self.torus, self.chi, k_values, res, refine_iters, self.threads)

    def rigidez(self, vector: Optional[Sequence[int]], samples: int, point=None) -> List[Tuple[Tuple[int, ...], RecoveryResult]]:
        """
        Recupera k·α_v por push-forward para o vetor dado ou, sem vetor, para cada vetor da base.
        """
        dim = 2 * self.torus.n
        if vector is not None:
            if len(vector) != dim:
                raise InvalidOption(f"--vector deve ter {dim} coordenadas inteiras")
            vectors = [tuple(vector)]
        else:
            vectors = [tuple(int(i == j) for j in range(dim)) for i in range(dim)]
        base = None if point is None else self._ponto(point).coords
        return [
            (v, extrema.pushforward_recover(self.torus, self.chi, self.k, v, samples, basepoint=base))
            for v in vectors
        ]


def cilindro(params: CylinderParams, t_min: float, t_max: float, t_count: int):
    """Varredura do cilindro; não depende de um toro."""
    if t_max < t_min:
        raise InvalidOption("--t-max deve ser ≥ --t-min")
    values = np.linspace(t_min, t_max, t_count) if t_count > 1 else np.array([t_min])
    return cylinder.sweep(params, values)

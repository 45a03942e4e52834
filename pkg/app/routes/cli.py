import argparse
import contextlib
import csv
import json
import sys
from typing import Callable, Dict, Iterable, Sequence, TextIO

from app.exceptions import InvalidOption
from app.schemas.cylinder import CylinderParams
from app.schemas.results import fmt
from app.schemas.run import RunConfig
from app.services.torus import TorusService, cilindro

DEFAULT_RES = {"grid": 32, "oracle": 8, "compare": 32, "extrema": 32}

COMMANDS = {
    "validate": "Valida o toro polarizado e mostra E e |Pf(E)|",
    "rho": "Densidade ρ_k num ponto pela série de laços geodésicos",
    "grid": "Amostra ρ_k numa malha do domínio fundamental (CSV)",
    "oracle": "Compara a série com o oráculo de funções teta, n = 1 (CSV)",
    "compare": "Compara as densidades de dois semicaracteres (--phases)",
    "cylinder": "Núcleo do cilindro torcido: série direta vs Poisson (CSV)",
    "extrema": "Extremos de ρ_k e, com --sweep, a tabela de localização",
    "rigidity": "Recupera as holonomias de L^k por push-forward",
    "offdiag": "Cota fora da diagonal entre --point e --point2",
    "hol": "Holonomia ao longo de γ_{p,v}: forma fechada e EDO",
}


class BergmanParser(argparse.ArgumentParser):
    """Erros de uso viram InvalidOption (saída 1) em vez do SystemExit(2) do argparse."""

    def error(self, message):
        raise InvalidOption(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="arquivo JSON do toro e do fibrado")
    common.add_argument("--out", help="arquivo de saída (padrão: saída padrão)")
    common.add_argument("--k", type=int, help="potência tensorial (sobrepõe a do arquivo)")
    common.add_argument("--eps", type=float, help="cota da cauda das séries")
    common.add_argument("--res", type=int, help="resolução por eixo")
    common.add_argument("--threads", type=int, help="threads da varredura (padrão: todos os núcleos)")
    common.add_argument("--point", help="coordenadas de rede x1,...,x2n em [0, 1)")
    common.add_argument("--point2", help="segundo ponto para offdiag")
    common.add_argument("--phases", help="fases de χ' para compare")
    common.add_argument("--vector", help="vetor da rede em coordenadas inteiras")
    common.add_argument("--steps", type=int, help="passos do integrador de transporte paralelo")
    common.add_argument("--eta", type=float, help="η do cilindro")
    common.add_argument("--alpha", type=float, help="torção α do cilindro")
    common.add_argument("--t-min", type=float, dest="t_min")
    common.add_argument("--t-max", type=float, dest="t_max")
    common.add_argument("--t-count", type=int, dest="t_count")
    common.add_argument("--dim", type=int, help="dimensão n do cilindro")
    common.add_argument("--sweep", help="faixa K1:K2 da tabela de localização")
    common.add_argument("--samples", type=int, help="amostras do push-forward")
    common.add_argument("--refine-iters", type=int, dest="refine_iters")
    common.add_argument("--log-level", dest="log_level")

    parser = BergmanParser(
        prog="bergman",
        description="Núcleo de Bergman de toros complexos polarizados",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for name, help_text in COMMANDS.items():
        commands.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    # opções omitidas ficam com o padrão do schema
    return RunConfig.model_validate({key: value for key, value in vars(args).items() if value is not None})


@contextlib.contextmanager
def _output(run_config: RunConfig, stdout: TextIO):
    if run_config.out is None:
        yield stdout
    else:
        with open(run_config.out, "w", encoding="utf-8", newline="") as stream:
            yield stream


def _write_json(stream: TextIO, payload) -> None:
    stream.write(json.dumps(payload, indent=2, ensure_ascii=False))
    stream.write("\n")


def _write_csv(stream: TextIO, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([value if isinstance(value, int) else fmt(value) for value in row])


def _service(run_config: RunConfig) -> TorusService:
    if run_config.config is None:
        raise InvalidOption(f"{run_config.command} exige --config")
    return TorusService.from_path(run_config.config, run_config.k, run_config.threads)


def _res(run_config: RunConfig) -> int:
    return run_config.res or DEFAULT_RES.get(run_config.command, 32)


def _validate(run_config: RunConfig, stream: TextIO) -> None:
    _write_json(stream, _service(run_config).validar().model_dump())


def _rho(run_config: RunConfig, stream: TextIO) -> None:
    result = _service(run_config).densidade(run_config.point, run_config.eps)
    low, high = result.enclosure()
    _write_json(stream, {**result.model_dump(), "enclosure": [low, high]})


def _grid(run_config: RunConfig, stream: TextIO) -> None:
    _service(run_config).malha(_res(run_config), run_config.eps).write_csv(stream)


def _oracle(run_config: RunConfig, stream: TextIO) -> None:
    rows = _service(run_config).oraculo(_res(run_config), run_config.eps)
    _write_csv(stream, ["x1", "x2", "rho_exact", "rho_oracle", "absdiff"], rows)


def _compare(run_config: RunConfig, stream: TextIO) -> None:
    report = _service(run_config).comparar(run_config.phases, _res(run_config), run_config.samples, run_config.eps)
    _write_json(stream, report.model_dump())


def _cylinder(run_config: RunConfig, stream: TextIO) -> None:
    params = CylinderParams(eta=run_config.eta, alpha=run_config.alpha, k=run_config.k or 1, n=run_config.dim)
    rows = cilindro(params, run_config.t_min, run_config.t_max, run_config.t_count)
    _write_csv(stream, ["t", "rho_direct", "rho_poisson", "absdiff"], rows)


def _extrema(run_config: RunConfig, stream: TextIO) -> None:
    service = _service(run_config)
    if run_config.sweep:
        rows = service.localizacao(run_config.sweep_range(), _res(run_config), run_config.refine_iters)
        _write_csv(stream, ["k", "dist", "bound", "ratio"], [(r.k, r.dist, r.bound, r.ratio) for r in rows])
        return
    maximum, minimum = service.extremos(_res(run_config), run_config.refine_iters)
    _write_json(stream, {"max": maximum.model_dump(), "min": minimum.model_dump()})


def _rigidity(run_config: RunConfig, stream: TextIO) -> None:
    results = _service(run_config).rigidez(run_config.vector, run_config.samples, run_config.point)
    _write_json(stream, [{"vector": list(v), **r.model_dump()} for v, r in results])


def _offdiag(run_config: RunConfig, stream: TextIO) -> None:
    result = _service(run_config).fora_diagonal(run_config.point, run_config.point2, run_config.eps)
    _write_json(stream, result.model_dump())


def _hol(run_config: RunConfig, stream: TextIO) -> None:
    closed, ode = _service(run_config).holonomia(run_config.point, run_config.vector, run_config.steps)
    _write_json(stream, {"closed_form": closed.model_dump(), "ode": ode.model_dump()})


HANDLERS: Dict[str, Callable[[RunConfig, TextIO], None]] = {
    "validate": _validate,
    "rho": _rho,
    "grid": _grid,
    "oracle": _oracle,
    "compare": _compare,
    "cylinder": _cylinder,
    "extrema": _extrema,
    "rigidity": _rigidity,
    "offdiag": _offdiag,
    "hol": _hol,
}


def run(run_config: RunConfig, stdout: TextIO = None) -> int:
    """
    Executa o subcomando. Erros do domínio são propagados para `app.main`, que define o código de saída.
    """
    with _output(run_config, stdout or sys.stdout) as stream:
        HANDLERS[run_config.command](run_config, stream)
    return 0

import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from app.exceptions import BergmanError, InvalidOption
from app.routes.cli import build_parser, run, run_config_from_args

logger = logging.getLogger("app")


def _erro_de_validacao(exc: ValidationError) -> InvalidOption:
    """
    Tratamento das opções inválidas: cada erro do pydantic vira uma linha "campo: mensagem".
    """
    errors = []
    for error in exc.errors():
        campo = ".".join(str(part) for part in error["loc"]) or "opções"
        errors.append(f"{campo}: {error['msg']}")
    return InvalidOption("; ".join(errors))


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Ponto de entrada da CLI. Códigos de saída: 0 sucesso, 1 entrada inválida, 2 falha numérica.
    """
    command = None
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        try:
            run_config = run_config_from_args(args)
        except ValidationError as exc:
            raise _erro_de_validacao(exc) from exc
        logging.basicConfig(
            level=run_config.log_level,
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )
        return run(run_config)
    except BergmanError as exc:
        logger.debug("comando %s falhou", command, exc_info=True)
        print(f"{type(exc).__name__}: {exc.detail}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())

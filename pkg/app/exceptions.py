class BergmanError(Exception):
    """
    Erro base do projeto. `exit_code` é o código de saída usado pela CLI.
    """
    exit_code = 2

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


# Erros de validação (saída 1)
class ValidationFailure(BergmanError):
    exit_code = 1


class ConfigParseError(ValidationFailure):
    pass


class NotPositiveDefinite(ValidationFailure):
    pass


class IntegralityViolation(ValidationFailure):
    pass


class DegenerateBasis(ValidationFailure):
    pass


class InvalidOption(ValidationFailure):
    pass


# Falhas numéricas (saída 2)
class NumericFailure(BergmanError):
    exit_code = 2


class RadiusTooLarge(NumericFailure):
    def __init__(self, detail: str, required: int = 0):
        super().__init__(detail)
        self.required = required


class StepCountTooSmall(NumericFailure):
    pass


class ModulusMismatch(NumericFailure):
    pass


class QuadratureUnconverged(NumericFailure):
    pass


class CharacteristicSolveFailed(NumericFailure):
    pass


class CutoffTooSmall(NumericFailure):
    pass


class SingularGram(NumericFailure):
    pass


class InconsistentSystem(NumericFailure):
    pass


class UnderdeterminedSystem(NumericFailure):
    """
    Sistema de holonomia com menos vetores que a dimensão real do toro.
    `points` guarda representantes da família de soluções numa malha.
    """

    def __init__(self, detail: str, points=None):
        super().__init__(detail)
        self.points = list(points or [])


class FitResidualTooLarge(NumericFailure):
    pass

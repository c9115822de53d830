class QThetaError(Exception):
    pass


class ParameterError(QThetaError, ValueError):
    pass


class DimensionError(ParameterError):
    pass


class FormMismatchError(ParameterError):
    pass


class SingularFormError(QThetaError, ArithmeticError):
    pass


class TailBoundError(QThetaError):
    def __init__(self, message: str, bound: float) -> None:
        super().__init__(f"{message} (achievable tail bound {bound:.3e})")
        self.bound = bound


class MultiplierError(QThetaError):
    def __init__(self, message: str, pair: tuple | None = None) -> None:
        if pair is not None:
            message = f"{message}: pair {pair}"
        super().__init__(message)
        self.pair = pair


class CochainError(MultiplierError):
    pass


class ConfigError(QThetaError):
    pass


class ScenarioError(QThetaError):
    pass

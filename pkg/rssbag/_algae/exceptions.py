class RssbagException(Exception):
    """Root of every error raised by `rssbag`.

    Each subclass carries a stable `code` which the command line prints
    as `error[<code>]: <message>`.
    """
    code = 'E_RSSBAG'


class ContractViolation(RssbagException):
    code = 'E_CONTRACT'


class NumericOverflow(ContractViolation):
    """A finite computation produced an infinite or NaN value."""


class ParseError(RssbagException):
    code = 'E_PARSE'


class StructuralError(RssbagException):
    code = 'E_STRUCTURE'


class InfeasibleSampling(RssbagException):
    code = 'E_INFEASIBLE'


class TrainingDiverged(RssbagException):
    code = 'E_DIVERGED'

    def __init__(self, message: str, epoch: int = -1, batch: int = -1):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


class UndefinedCorrelation(RssbagException):
    code = 'E_CORRELATION'


class FormulaDomainError(RssbagException):
    code = 'E_DOMAIN'

# -*- coding: utf-8 -*-
"""Hierarquia de erros do explicador.

Cada erro carrega a categoria usada nos logs/HTTP e o código de saída da CLI:
1 para entrada inválida, 2 para foils sem explicação possível e 3 quando um
limite de recurso configurado é atingido.
"""
from __future__ import annotations

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_RESOURCE = 3


class ExplicadorError(Exception):
    """Base de todos os erros de domínio."""

    category = "runtime"
    exit_code = EXIT_INPUT
    http_status = 500


class InputError(ExplicadorError, ValueError):
    category = "input"
    exit_code = EXIT_INPUT
    http_status = 400


class InfeasibleError(ExplicadorError):
    category = "infeasible"
    exit_code = EXIT_INFEASIBLE
    http_status = 422


class ResourceLimitError(ExplicadorError):
    category = "resource"
    exit_code = EXIT_RESOURCE
    http_status = 413

    def __init__(self, message: str, *, limit: int | None = None):
        super().__init__(message)
        self.limit = limit


class PddlSyntaxError(InputError):
    def __init__(self, message: str, *, line: int = 0, column: int = 0):
        super().__init__(f"{message} (linha {line}, coluna {column})")
        self.line = line
        self.column = column


class UnsupportedRequirementError(InputError):
    def __init__(self, flag: str, *, line: int = 0, column: int = 0):
        super().__init__(f"Recurso PDDL não suportado: {flag} (linha {line}, coluna {column})")
        self.flag = flag
        self.line = line
        self.column = column


class UnknownTypeError(InputError):
    pass


class GroundingError(InputError):
    pass


class UnknownActionError(InputError):
    def __init__(self, name: str):
        super().__init__(f"Ação desconhecida no modelo: {name!r}")
        self.name = name


class UnknownUnitError(InputError):
    def __init__(self, unit_id: str):
        super().__init__(f"Unidade de abstração desconhecida: {unit_id!r}")
        self.unit_id = unit_id


class UnitNotDroppedError(InputError):
    def __init__(self, unit_id: str):
        super().__init__(f"Unidade {unit_id!r} não está abstraída neste modelo.")
        self.unit_id = unit_id


class LatticeConfigError(InputError):
    pass


class InvalidFoilError(InputError):
    def __init__(self, message: str, *, foil: str | None = None):
        super().__init__(message)
        self.foil = foil


class PoolExhaustedError(InputError):
    pass


class NonDeterministicModelError(InputError):
    pass


class ManifestError(InputError):
    pass


class UnknownMethodError(InputError):
    pass


class InconsistentFoilsError(InfeasibleError):
    pass


class NoExplanationError(InfeasibleError):
    pass


class InfeasibleCoverError(InfeasibleError):
    pass


class GroundingSizeError(ResourceLimitError):
    pass


class BeliefStateLimitError(ResourceLimitError):
    pass


class EnumerationLimitError(ResourceLimitError):
    pass


def error_body(exc: ExplicadorError) -> dict:
    """Corpo `error` usado pelas respostas JSON da API e da CLI."""
    body = {"code": type(exc).__name__, "category": exc.category, "message": str(exc)}
    for attr in ("flag", "line", "column", "unit_id", "foil", "limit"):
        value = getattr(exc, attr, None)
        if value not in (None, "", 0):
            body[attr] = value
    return body

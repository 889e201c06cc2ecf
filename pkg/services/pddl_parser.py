# -*- coding: utf-8 -*-
"""Leitura de PDDL via tarski, restrita a :strips, :typing, :conditional-effects e :action-costs.

O texto é convertido para minúsculas e entregue ao ``PDDLReader`` do tarski; o
problema devolvido é percorrido e convertido na forma levantada usada pelo
aterramento (``DomainAst``/``ProblemAst``). Custos de ação são descartados com
aviso; qualquer outro recurso (negação em precondição, igualdade, fluentes
numéricos, ações durativas, axiomas) é rejeitado nomeando o requisito.

Erros do tarski e do ANTLR nunca escapam daqui: viram ``PddlSyntaxError``,
``UnknownTypeError`` ou ``GroundingError``.
"""
from __future__ import annotations

import logging
import re
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Tuple

from tarski.errors import TarskiError, UndefinedPredicate, UndefinedSort
from tarski.fstrips.fstrips import AddEffect, DelEffect
from tarski.io import PDDLReader
from tarski.syntax.formulas import Atom, CompoundFormula, QuantifiedFormula, Tautology
from tarski.syntax.terms import Constant, Variable

from services.errors import (
    GroundingError,
    PddlSyntaxError,
    UnknownTypeError,
    UnsupportedRequirementError,
)

logger = logging.getLogger(__name__)

SUPPORTED_REQUIREMENTS = frozenset({":strips", ":typing", ":conditional-effects", ":action-costs"})
ROOT_TYPE = "object"

_REQUIREMENTS = re.compile(r"\(\s*:requirements\b([^()]*)\)")
_FLAG = re.compile(r":[a-z][\w-]*")
_UNSUPPORTED_SECTIONS = {
    ":durative-action": ":durative-actions",
    ":derived": ":derived-predicates",
}
_SECTION = re.compile(r"\(\s*(:durative-action|:derived)\b")
_EITHER = re.compile(r"\(\s*either\b")
_FUNCTIONS = re.compile(r"\(\s*:functions\b")
_METRIC = re.compile(r"\(\s*:metric\b")
_ANTLR_POSITION = re.compile(r"line (\d+):(\d+)")


@dataclass(frozen=True)
class AtomAst:
    predicate: str
    args: Tuple[str, ...] = ()

    def __str__(self) -> str:
        return "(" + " ".join((self.predicate, *self.args)) + ")"


@dataclass(frozen=True)
class EffectAst:
    """Cláusula levantada: `forall` vira `variables`, `when` vira `condition`."""

    variables: Tuple[Tuple[str, str], ...] = ()
    condition: Tuple[AtomAst, ...] = ()
    add: Tuple[AtomAst, ...] = ()
    delete: Tuple[AtomAst, ...] = ()


@dataclass(frozen=True)
class ActionSchema:
    name: str
    parameters: Tuple[Tuple[str, str], ...] = ()
    precondition: Tuple[AtomAst, ...] = ()
    effects: Tuple[EffectAst, ...] = ()


@dataclass
class DomainAst:
    """Domínio levantado. ``types`` mapeia cada tipo aos seus ancestrais (exclusive)."""

    name: str
    requirements: Tuple[str, ...] = ()
    types: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    constants: Dict[str, str] = field(default_factory=dict)
    predicates: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    actions: Tuple[ActionSchema, ...] = ()
    warnings: List[str] = field(default_factory=list)
    source: str = ""


@dataclass
class ProblemAst:
    name: str
    domain_name: str = ""
    objects: Dict[str, str] = field(default_factory=dict)
    init: Tuple[AtomAst, ...] = ()
    goal: Tuple[AtomAst, ...] = ()
    warnings: List[str] = field(default_factory=list)


# ── verificações léxicas antes do tarski ────────────────────────────────────

def _where(text: str, offset: int) -> Dict[str, int]:
    line_start = text.rfind("\n", 0, offset) + 1
    return {"line": text.count("\n", 0, offset) + 1, "column": offset - line_start + 1}


def _requirements(text: str) -> Tuple[str, ...]:
    flags: List[str] = []
    for section in _REQUIREMENTS.finditer(text):
        for flag in _FLAG.finditer(section.group(1)):
            if flag.group(0) not in SUPPORTED_REQUIREMENTS:
                raise UnsupportedRequirementError(flag.group(0), **_where(text, section.start(1) + flag.start()))
            flags.append(flag.group(0))
    return tuple(flags)


def _reject_unsupported_syntax(text: str) -> None:
    section = _SECTION.search(text)
    if section:
        raise UnsupportedRequirementError(_UNSUPPORTED_SECTIONS[section.group(1)], **_where(text, section.start()))
    either = _EITHER.search(text)
    if either:
        raise UnsupportedRequirementError("either (tipos de união)", **_where(text, either.start()))


def _warn(warnings: List[str], message: str) -> None:
    warnings.append(message)
    logger.warning("pddl_warning message=%s", message)


# ── leitura pelo tarski ─────────────────────────────────────────────────────

@contextmanager
def _tarski_errors(what: str) -> Iterator[None]:
    try:
        yield
    except UndefinedSort as exc:
        raise UnknownTypeError(f"Tipo desconhecido em {what}: {exc}") from exc
    except UndefinedPredicate as exc:
        raise GroundingError(f"Predicado não declarado em {what}: {exc}") from exc
    except TarskiError as exc:
        raise PddlSyntaxError(f"PDDL inválido em {what}: {exc}") from exc
    except Exception as exc:
        # Erros de sintaxe do ANTLR chegam fora da hierarquia do tarski.
        match = _ANTLR_POSITION.search(str(exc))
        position = {"line": int(match.group(1)), "column": int(match.group(2)) + 1} if match else {}
        raise PddlSyntaxError(f"PDDL inválido em {what}: {exc}", **position) from exc


def _read(domain_text: str, problem_text: str | None = None) -> Any:
    reader = PDDLReader(raise_on_error=True)
    with tempfile.TemporaryDirectory(prefix="explicador-pddl-") as folder:
        domain_path = Path(folder) / "domain.pddl"
        domain_path.write_text(domain_text, encoding="utf-8")
        with _tarski_errors("domínio"):
            reader.parse_domain(str(domain_path))
        if problem_text is None:
            return reader.problem
        problem_path = Path(folder) / "problem.pddl"
        problem_path.write_text(problem_text, encoding="utf-8")
        with _tarski_errors("problema"):
            return reader.parse_instance(str(problem_path))


# ── conversão do problema tarski para a forma levantada ─────────────────────

def _is_builtin(symbol: Any) -> bool:
    return not isinstance(symbol.name, str)


def _term(term: Any) -> str:
    if isinstance(term, Variable):
        return "?" + str(term.symbol).lstrip("?")
    if isinstance(term, Constant):
        return str(term.name)
    raise UnsupportedRequirementError(":numeric-fluents")


def _atom(atom: Atom) -> AtomAst:
    predicate = atom.predicate
    if _is_builtin(predicate):
        symbol = getattr(predicate.name, "value", predicate.name)
        raise UnsupportedRequirementError(":equality" if symbol in ("=", "!=") else ":numeric-fluents")
    return AtomAst(predicate.name, tuple(_term(term) for term in atom.subterms))


def _conjunction(formula: Any) -> List[AtomAst]:
    """Conjunção de átomos positivos (precondições, condições de `when`, metas)."""
    if formula is None or isinstance(formula, Tautology):
        return []
    if isinstance(formula, Atom):
        return [_atom(formula)]
    if isinstance(formula, CompoundFormula):
        connective = formula.connective.name.lower()
        if connective == "and":
            return [atom for sub in formula.subformulas for atom in _conjunction(sub)]
        if connective == "not":
            raise UnsupportedRequirementError(":negative-preconditions")
        raise UnsupportedRequirementError(":disjunctive-preconditions")
    if isinstance(formula, QuantifiedFormula):
        if formula.quantifier.name.lower() == "exists":
            raise UnsupportedRequirementError(":existential-preconditions")
        raise UnsupportedRequirementError(":universal-preconditions")
    raise UnsupportedRequirementError(f"fórmula {type(formula).__name__}")


def _parameter(variable: Any) -> Tuple[str, str]:
    return _term(variable), variable.sort.name


class _EffectCollector:
    """Agrupa efeitos do tarski em cláusulas por (variáveis de forall, condição)."""

    def __init__(self, action_name: str, warnings: List[str]):
        self.action_name = action_name
        self.warnings = warnings
        self.groups: Dict[Tuple[Tuple[Tuple[str, str], ...], Tuple[AtomAst, ...]], Tuple[List[AtomAst], List[AtomAst]]] = {}

    def visit(self, effect: Any, variables: Tuple[Tuple[str, str], ...] = ()) -> None:
        if isinstance(effect, (AddEffect, DelEffect)):
            key = (variables, tuple(_conjunction(effect.condition)))
            add, delete = self.groups.setdefault(key, ([], []))
            (add if isinstance(effect, AddEffect) else delete).append(_atom(effect.atom))
        elif hasattr(effect, "variables") and hasattr(effect, "effects"):
            scope = variables + tuple(_parameter(variable) for variable in effect.variables)
            for inner in effect.effects:
                self.visit(inner, scope)
        elif hasattr(effect, "lhs") and "total-cost" in str(effect.lhs):
            _warn(self.warnings, f"custo de ação descartado ({self.action_name})")
        elif hasattr(effect, "lhs"):
            raise UnsupportedRequirementError(":numeric-fluents")
        else:
            raise UnsupportedRequirementError(f"efeito {type(effect).__name__}")

    def clauses(self) -> Tuple[EffectAst, ...]:
        plain = ((), ())
        order = sorted(self.groups, key=lambda key: key != plain)
        return tuple(EffectAst(key[0], key[1], tuple(self.groups[key][0]), tuple(self.groups[key][1])) for key in order)


def _schema(action: Any, warnings: List[str]) -> ActionSchema:
    collector = _EffectCollector(action.name, warnings)
    for effect in action.effects:
        collector.visit(effect)
    return ActionSchema(
        name=action.name,
        parameters=tuple(_parameter(variable) for variable in action.parameters.vars()),
        precondition=tuple(_conjunction(action.precondition)),
        effects=collector.clauses(),
    )


def _user_sorts(language: Any) -> List[Any]:
    return [sort for sort in language.sorts if not getattr(sort, "builtin", False)]


def parse_domain(text: str) -> DomainAst:
    text = text.lower()
    requirements = _requirements(text)
    _reject_unsupported_syntax(text)
    task = _read(text)
    language = task.language

    domain = DomainAst(name=task.domain_name, requirements=requirements, source=text)
    ancestors = language.ancestor_sorts
    for sort in _user_sorts(language):
        domain.types[sort.name] = tuple(
            sorted(parent.name for parent in ancestors.get(sort, ()) if not getattr(parent, "builtin", False))
        )
    domain.constants = {constant.name: constant.sort.name for constant in language.constants()}
    domain.predicates = {
        predicate.name: tuple(sort.name for sort in predicate.sort)
        for predicate in language.predicates
        if not _is_builtin(predicate)
    }
    if _FUNCTIONS.search(text):
        _warn(domain.warnings, "seção :functions ignorada")
    domain.actions = tuple(_schema(action, domain.warnings) for action in task.actions.values())
    logger.info("pddl_domain_parsed domain=%s actions=%d types=%d", domain.name, len(domain.actions), len(domain.types))
    return domain


def parse_problem(text: str, domain: DomainAst) -> ProblemAst:
    """Lê o problema no contexto do domínio já lido (o tarski precisa dos dois)."""
    text = text.lower()
    _requirements(text)
    task = _read(domain.source, text)

    problem = ProblemAst(name=task.name, domain_name=str(getattr(task, "domain_name", "") or ""))
    problem.objects = {
        constant.name: constant.sort.name
        for constant in task.language.constants()
        if constant.name not in domain.constants
    }
    init: List[AtomAst] = []
    for item in task.init.as_atoms():
        if isinstance(item, Atom):
            init.append(_atom(item))
        else:
            _warn(problem.warnings, "custo total inicial ignorado")
    problem.init = tuple(sorted(init, key=str))
    problem.goal = tuple(_conjunction(task.goal))
    if not problem.goal:
        _warn(problem.warnings, "meta vazia assumida")
    if _METRIC.search(text):
        _warn(problem.warnings, "seção :metric ignorada")
    return problem

# -*- coding: utf-8 -*-
"""Impressão de um PlanningModel aterrado como par domínio/problema PDDL.

Cada ação vira um esquema sem parâmetros e os objetos viram :constants, de modo
que parse + ground do texto impresso (com compile_static=False) devolve
um modelo igual ao original.
"""
from __future__ import annotations

from typing import Iterable, List, Tuple

from services.model import EffectClause, Fluent, GroundAction, PlanningModel


def _conj(items: Iterable[Fluent], *, negate: bool = False) -> List[str]:
    template = "(not {})" if negate else "{}"
    return [template.format(fluent) for fluent in sorted(items)]


def _and(parts: List[str]) -> str:
    return "(and " + " ".join(parts) + ")" if parts else "(and)"


def _clause(clause: EffectClause, *, plain: bool) -> str:
    body = _and(_conj(clause.add) + _conj(clause.delete, negate=True))
    if plain:
        return body
    return f"(when {_and(_conj(clause.condition))} {body})"


def _action(action: GroundAction) -> str:
    parts: List[str] = []
    for index, clause in enumerate(action.effects):
        parts.append(_clause(clause, plain=index == 0 and not clause.condition))
    lines = [f"  (:action {action.name}", "   :parameters ()"]
    # Seções vazias são omitidas em vez de impressas como (and).
    if action.prec:
        lines.append(f"   :precondition {_and(_conj(action.prec))}")
    if parts:
        lines.append(f"   :effect {_and(parts)}")
    lines[-1] += ")"
    return "\n".join(lines)


def write_model(model: PlanningModel, *, domain_name: str = "ground") -> Tuple[str, str]:
    if not model.deterministic:
        raise ValueError("Somente modelos concretos podem ser impressos como PDDL.")
    objects = sorted({arg for fluent in model.fluents for arg in fluent.args})
    arities = sorted({(fluent.predicate, len(fluent.args)) for fluent in model.fluents})
    predicates = " ".join(
        "(" + " ".join([name, *(f"?x{i}" for i in range(arity))]) + ")" for name, arity in arities
    )
    domain_lines = [
        f"(define (domain {domain_name})",
        "  (:requirements :strips :conditional-effects)",
        f"  (:constants {' '.join(objects)})" if objects else "",
        f"  (:predicates {predicates})",
        *(_action(action) for action in model.actions),
        ")",
    ]
    problem_name = model.name or "ground-problem"
    problem_lines = [
        f"(define (problem {problem_name})",
        f"  (:domain {domain_name})",
        "  (:init " + " ".join(_conj(model.init)) + ")",
        f"  (:goal {_and(_conj(model.goal))})",
        ")",
    ]
    domain_text = "\n".join(line for line in domain_lines if line)
    return domain_text + "\n", "\n".join(problem_lines) + "\n"

# -*- coding: utf-8 -*-
"""Aterramento de DomainAst + ProblemAst (lidos pelo tarski) em PlanningModel.

Predicados estáticos (que não aparecem em nenhum efeito) são avaliados contra o
estado inicial durante o aterramento: ações com precondição estática falsa são
descartadas e precondições estáticas verdadeiras são removidas. O estado
inicial é mantido intacto.
"""
from __future__ import annotations

import logging
import time
from typing import Dict, FrozenSet, Iterator, List, Mapping, Sequence, Set, Tuple

from services.errors import GroundingError, GroundingSizeError, UnknownTypeError
from services.model import EffectClause, Fluent, GroundAction, PlanningModel
from services.pddl_parser import ROOT_TYPE, ActionSchema, AtomAst, DomainAst, EffectAst, ProblemAst

logger = logging.getLogger(__name__)

DEFAULT_ACTION_CAP = 500_000

Binding = Dict[str, str]


def _type_closure(domain: DomainAst) -> Dict[str, Tuple[str, ...]]:
    """Para cada tipo declarado, o próprio tipo seguido dos ancestrais."""
    chains: Dict[str, Tuple[str, ...]] = {ROOT_TYPE: (ROOT_TYPE,)}
    for type_name, ancestors in domain.types.items():
        chain = [type_name, *(parent for parent in ancestors if parent != type_name)]
        if ROOT_TYPE not in chain:
            chain.append(ROOT_TYPE)
        chains[type_name] = tuple(chain)
    return chains


def objects_by_type(domain: DomainAst, problem: ProblemAst) -> Dict[str, Tuple[str, ...]]:
    chains = _type_closure(domain)
    typed = {**domain.constants, **problem.objects}
    buckets: Dict[str, Set[str]] = {type_name: set() for type_name in chains}
    for obj, type_name in typed.items():
        if type_name not in chains:
            raise UnknownTypeError(f"Objeto {obj!r} tem tipo desconhecido {type_name!r}.")
        for ancestor in chains[type_name]:
            buckets[ancestor].add(obj)
    return {type_name: tuple(sorted(members)) for type_name, members in buckets.items()}


def static_predicates(domain: DomainAst) -> FrozenSet[str]:
    changing: Set[str] = set()
    for schema in domain.actions:
        for effect in schema.effects:
            changing.update(atom.predicate for atom in effect.add)
            changing.update(atom.predicate for atom in effect.delete)
    used: Set[str] = set(domain.predicates)
    for schema in domain.actions:
        used.update(atom.predicate for atom in schema.precondition)
        for effect in schema.effects:
            used.update(atom.predicate for atom in effect.condition)
    return frozenset(used - changing)


def _ground_atom(atom: AtomAst, binding: Mapping[str, str]) -> Fluent:
    try:
        return Fluent(atom.predicate, tuple(binding[arg] if arg.startswith("?") else arg for arg in atom.args))
    except KeyError as exc:
        raise GroundingError(f"Variável livre {exc.args[0]} em {atom}.") from exc


class _Grounder:
    def __init__(
        self,
        domain: DomainAst,
        problem: ProblemAst,
        *,
        action_cap: int,
        compile_static: bool,
    ):
        self.domain = domain
        self.problem = problem
        self.action_cap = action_cap
        self.compile_static = compile_static
        self.objects = objects_by_type(domain, problem)
        self.statics = static_predicates(domain) if compile_static else frozenset()
        self.init = frozenset(_ground_atom(atom, {}) for atom in problem.init)
        self.candidates = 0

    def _domain_of(self, type_name: str) -> Tuple[str, ...]:
        if type_name not in self.objects:
            raise UnknownTypeError(f"Tipo desconhecido {type_name!r} em parâmetro.")
        return self.objects[type_name]

    def _static_ok(self, atoms: Sequence[AtomAst], binding: Mapping[str, str]) -> bool:
        for atom in atoms:
            if atom.predicate not in self.statics:
                continue
            if any(arg.startswith("?") and arg not in binding for arg in atom.args):
                continue
            if _ground_atom(atom, binding) not in self.init:
                return False
        return True

    def _bindings(
        self,
        parameters: Sequence[Tuple[str, str]],
        constraints: Sequence[AtomAst],
        binding: Binding,
    ) -> Iterator[Binding]:
        if not parameters:
            if self._static_ok(constraints, binding):
                yield dict(binding)
            return
        (variable, type_name), rest = parameters[0], parameters[1:]
        for obj in self._domain_of(type_name):
            self.candidates += 1
            if self.candidates > self.action_cap:
                raise GroundingSizeError(
                    f"Aterramento excedeu {self.action_cap} instanciações candidatas.",
                    limit=self.action_cap,
                )
            binding[variable] = obj
            if self._static_ok(constraints, binding):
                yield from self._bindings(rest, constraints, binding)
            del binding[variable]

    def _dynamic(self, atoms: Sequence[AtomAst], binding: Mapping[str, str]) -> FrozenSet[Fluent]:
        return frozenset(_ground_atom(atom, binding) for atom in atoms if atom.predicate not in self.statics)

    def _clauses(self, effect: EffectAst, binding: Binding) -> Iterator[EffectClause]:
        for full in self._bindings(effect.variables, effect.condition, dict(binding)):
            add = frozenset(_ground_atom(atom, full) for atom in effect.add)
            # Add vence: um fluente apagado e adicionado pela mesma cláusula fica verdadeiro.
            delete = frozenset(_ground_atom(atom, full) for atom in effect.delete) - add
            if not add and not delete:
                continue
            yield EffectClause(self._dynamic(effect.condition, full), add, delete)

    def ground_schema(self, schema: ActionSchema) -> Iterator[GroundAction]:
        for binding in self._bindings(schema.parameters, schema.precondition, {}):
            args = tuple(binding[variable] for variable, _ in schema.parameters)
            clauses: List[EffectClause] = []
            for effect in schema.effects:
                clauses.extend(self._clauses(effect, binding))
            yield GroundAction(
                name="_".join((schema.name, *args)),
                prec=self._dynamic(schema.precondition, binding),
                effects=tuple(clauses),
                schema=schema.name,
                args=args,
            )


def ground(
    domain: DomainAst,
    problem: ProblemAst,
    *,
    action_cap: int = DEFAULT_ACTION_CAP,
    compile_static: bool = True,
) -> PlanningModel:
    started = time.perf_counter()
    if problem.domain_name and problem.domain_name != domain.name:
        logger.warning("pddl_warning message=problema declara domínio %s, recebido %s", problem.domain_name, domain.name)

    grounder = _Grounder(domain, problem, action_cap=action_cap, compile_static=compile_static)
    declared = domain.predicates
    actions: Dict[str, GroundAction] = {}
    for schema in domain.actions:
        for atom in (*schema.precondition, *(a for e in schema.effects for a in (*e.condition, *e.add, *e.delete))):
            if declared and atom.predicate not in declared:
                raise GroundingError(f"Predicado não declarado {atom.predicate!r} na ação {schema.name}.")
        for action in grounder.ground_schema(schema):
            if action.name in actions:
                raise GroundingError(f"Nome de ação aterrada repetido: {action.name}.")
            actions[action.name] = action
            if len(actions) > action_cap:
                raise GroundingSizeError(f"Aterramento excedeu {action_cap} ações.", limit=action_cap)

    init = grounder.init
    goal = frozenset(_ground_atom(atom, {}) for atom in problem.goal)
    universe: Set[Fluent] = set(init) | set(goal)
    for action in actions.values():
        universe |= action.fluents

    model = PlanningModel(
        fluents=frozenset(universe),
        actions=tuple(actions.values()),
        init=init,
        goal=goal,
        name=problem.name,
    )
    if compile_static:
        logger.info("static_compiled predicates=%s", ",".join(sorted(grounder.statics)) or "-")
    logger.info(
        "grounding_complete problem=%s actions=%d fluents=%d candidates=%d elapsed_s=%.2f",
        problem.name,
        len(model.actions),
        len(model.fluents),
        grounder.candidates,
        time.perf_counter() - started,
    )
    return model

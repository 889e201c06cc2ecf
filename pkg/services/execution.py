# -*- coding: utf-8 -*-
"""Semântica de execução de planos e validação de foils.

Modelos concretos usam a semântica determinística a(S). Modelos abstratos usam
a semântica otimista: o foil vale se ALGUMA resolução das cláusulas ND atinge a
meta. Cada cláusula ND dispara ou não como um todo (adds e deletes juntos).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Sequence, Set, Tuple, Union

from services.abstraction import AbstractModel, AbstractionSpec, AbstractionUnit, concretize
from services.errors import (
    BeliefStateLimitError,
    InvalidFoilError,
    NonDeterministicModelError,
    UnitNotDroppedError,
    UnknownActionError,
)
from services.model import EffectClause, Fluent, GroundAction, PlanningModel, State

DEFAULT_BELIEF_CAP = 100_000

Validatable = Union[PlanningModel, AbstractModel]


def normalize_action_name(raw: str) -> str:
    """"navigate w0 w1", "(navigate w0 w1)" e "navigate_w0_w1" viram o mesmo nome."""
    parts = str(raw).strip().strip("()").lower().split()
    if not parts:
        raise InvalidFoilError("Nome de ação vazio em foil.", foil=str(raw))
    return "_".join(parts)


@dataclass(frozen=True)
class Foil:
    actions: Tuple[str, ...]
    label: str = ""

    @classmethod
    def parse(cls, items: Iterable[str], *, label: str = "") -> "Foil":
        return cls(tuple(normalize_action_name(item) for item in items), label)

    def resolve(self, model: PlanningModel) -> "Foil":
        for name in self.actions:
            if name not in model.action_map:
                raise UnknownActionError(name)
        return self

    @property
    def name(self) -> str:
        return self.label or "⟨" + ", ".join(self.actions) + "⟩"

    def __str__(self) -> str:
        return self.name


def apply_action(state: State, action: GroundAction) -> State:
    if not action.deterministic:
        raise NonDeterministicModelError(f"Ação {action.name} tem efeitos não determinísticos.")
    if not action.prec <= state:
        return state
    adds: Set[Fluent] = set()
    dels: Set[Fluent] = set()
    for clause in action.effects:
        if clause.condition <= state:
            adds |= clause.add
            dels |= clause.delete
    return frozenset((state | adds) - dels)


def validate_plan(model: PlanningModel, foil: Foil) -> bool:
    state: State = model.init
    for name in foil.actions:
        action = model.action_map.get(name)
        if action is None:
            raise UnknownActionError(name)
        state = apply_action(state, action)
    return model.goal <= state


def successors(state: State, action: GroundAction) -> Set[State]:
    """Todos os estados alcançáveis por uma resolução das cláusulas ND."""
    if not action.prec <= state:
        return {state}
    adds: Set[Fluent] = set()
    dels: Set[Fluent] = set()
    optional: List[EffectClause] = []
    for clause in action.effects:
        if not clause.condition <= state:
            continue
        if clause.nd:
            optional.append(clause)
        else:
            adds |= clause.add
            dels |= clause.delete
    result: Set[State] = set()
    for size in range(len(optional) + 1):
        for chosen in combinations(optional, size):
            step_adds = set(adds)
            step_dels = set(dels)
            for clause in chosen:
                step_adds |= clause.add
                step_dels |= clause.delete
            result.add(frozenset((state | step_adds) - step_dels))
    return result


def _lookup(model: Validatable, name: str) -> GroundAction:
    if isinstance(model, AbstractModel):
        if name not in model.base.action_map:
            raise UnknownActionError(name)
        return model.action(name)
    action = model.action_map.get(name)
    if action is None:
        raise UnknownActionError(name)
    return action


def validate_plan_nd(model: Validatable, foil: Foil, *, belief_cap: int = DEFAULT_BELIEF_CAP) -> bool:
    belief: Set[State] = {model.init}
    for step, name in enumerate(foil.actions, start=1):
        action = _lookup(model, name)
        expanded: Set[State] = set()
        for state in belief:
            expanded |= successors(state, action)
            if len(expanded) > belief_cap:
                raise BeliefStateLimitError(
                    f"Estado de crença excedeu {belief_cap} estados no passo {step} ({name}).",
                    limit=belief_cap,
                )
        belief = expanded
    goal = model.goal
    return any(goal <= state for state in belief)


class FoilValidator:
    """Memoiza a validade de (Λ, foil) para um mesmo modelo base."""

    def __init__(self, base: PlanningModel, *, belief_cap: int = DEFAULT_BELIEF_CAP):
        self.base = base
        self.belief_cap = belief_cap
        self._cache: Dict[Tuple[FrozenSet[str], Foil], bool] = {}
        self.checks = 0

    def model(self, spec: AbstractionSpec) -> AbstractModel:
        return AbstractModel(self.base, spec)

    def is_valid(self, spec: AbstractionSpec, foil: Foil) -> bool:
        key = (spec.id_set, foil)
        cached = self._cache.get(key)
        if cached is None:
            self.checks += 1
            cached = validate_plan_nd(self.model(spec), foil, belief_cap=self.belief_cap)
            self._cache[key] = cached
        return cached

    def all_valid(self, spec: AbstractionSpec, foils: Sequence[Foil]) -> bool:
        return all(self.is_valid(spec, foil) for foil in foils)


def resolution_set(
    models: Iterable[AbstractModel],
    foils: Sequence[Foil],
    unit: AbstractionUnit | str,
    *,
    strict: bool = True,
    validator: FoilValidator | None = None,
    belief_cap: int = DEFAULT_BELIEF_CAP,
) -> FrozenSet[Foil]:
    """Foils que deixam de valer em todos os modelos após γ_p.

    Com strict=False, modelos onde a unidade já é concreta ficam como estão.
    """
    unit_id = unit.id if isinstance(unit, AbstractionUnit) else unit
    concretized: List[AbstractModel] = []
    for model in models:
        if unit_id in model.spec:
            concretized.append(concretize(model, unit_id))
        elif strict:
            raise UnitNotDroppedError(unit_id)
        else:
            concretized.append(model)

    def valid(model: AbstractModel, foil: Foil) -> bool:
        if validator is not None and validator.base is model.base:
            return validator.is_valid(model.spec, foil)
        return validate_plan_nd(model, foil, belief_cap=belief_cap)

    return frozenset(foil for foil in foils if not any(valid(model, foil) for model in concretized))

# -*- coding: utf-8 -*-
"""Projeção f_Λ, concretização γ_p e custo de comunicação de cada unidade.

O reticulado nunca é materializado: um modelo abstrato é apenas o par
(modelo base, Λ) e toda concretização é uma nova projeção a partir da base.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Dict, FrozenSet, Iterable, List, Mapping, Sequence, Tuple

from services.errors import UnitNotDroppedError, UnknownUnitError
from services.model import EffectClause, Fluent, GroundAction, ModelUpdateMessage, PlanningModel


@dataclass(frozen=True)
class AbstractionUnit:
    id: str
    fluents: FrozenSet[Fluent]
    # Preenchido quando a unidade cobre todos os aterramentos destes predicados.
    predicates: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if not self.fluents:
            raise ValueError(f"Unidade {self.id!r} sem fluentes.")

    @classmethod
    def for_predicate(cls, model: PlanningModel, predicate: str, *, unit_id: str | None = None) -> "AbstractionUnit":
        return cls(unit_id or predicate, model.fluents_of(predicate), (predicate,))


@dataclass(frozen=True)
class AbstractionSpec:
    """Λ: conjunto canônico (ordenado, sem repetição) de unidades abstraídas."""

    units: Tuple[AbstractionUnit, ...] = ()

    def __post_init__(self) -> None:
        unique = {unit.id: unit for unit in self.units}
        object.__setattr__(self, "units", tuple(unique[key] for key in sorted(unique)))

    @classmethod
    def of(cls, units: Iterable[AbstractionUnit]) -> "AbstractionSpec":
        return cls(tuple(units))

    @cached_property
    def ids(self) -> Tuple[str, ...]:
        return tuple(unit.id for unit in self.units)

    @cached_property
    def id_set(self) -> FrozenSet[str]:
        return frozenset(self.ids)

    @cached_property
    def removed(self) -> FrozenSet[Fluent]:
        found: set = set()
        for unit in self.units:
            found |= unit.fluents
        return frozenset(found)

    def __contains__(self, unit: object) -> bool:
        unit_id = unit.id if isinstance(unit, AbstractionUnit) else unit
        return unit_id in self.id_set

    def __len__(self) -> int:
        return len(self.units)

    def __le__(self, other: "AbstractionSpec") -> bool:
        return self.id_set <= other.id_set

    def without(self, *unit_ids: str) -> "AbstractionSpec":
        drop = set(unit_ids)
        return AbstractionSpec(tuple(unit for unit in self.units if unit.id not in drop))

    def union(self, units: Iterable[AbstractionUnit]) -> "AbstractionSpec":
        return AbstractionSpec(self.units + tuple(units))

    def label(self) -> str:
        return "{" + ", ".join(self.ids) + "}"


@lru_cache(maxsize=65536)
def project_action(action: GroundAction, removed: FrozenSet[Fluent]) -> GroundAction:
    """Projeta uma ação; `removed` deve conter apenas fluentes que a ação usa."""
    if not removed:
        return action
    prec_touched = bool(action.prec & removed)
    clauses: List[EffectClause] = []
    for clause in action.effects:
        add = clause.add - removed
        delete = clause.delete - removed
        if not add and not delete:
            continue
        clauses.append(
            EffectClause(
                condition=clause.condition - removed,
                add=add,
                delete=delete,
                nd=clause.nd or prec_touched or bool(clause.condition & removed),
            )
        )
    return GroundAction(
        name=action.name,
        prec=action.prec - removed,
        effects=tuple(clauses),
        schema=action.schema,
        args=action.args,
    )


@dataclass(frozen=True)
class AbstractModel:
    base: PlanningModel
    spec: AbstractionSpec

    @cached_property
    def removed(self) -> FrozenSet[Fluent]:
        return self.spec.removed

    @cached_property
    def init(self) -> FrozenSet[Fluent]:
        return self.base.init - self.removed

    @cached_property
    def goal(self) -> FrozenSet[Fluent]:
        return self.base.goal - self.removed

    def action(self, name: str) -> GroundAction:
        """Projeção preguiçosa de uma única ação (usada na validação de foils)."""
        action = self.base.action_map[name]
        return project_action(action, action.fluents & self.removed)

    @cached_property
    def model(self) -> PlanningModel:
        return PlanningModel(
            fluents=self.base.fluents - self.removed,
            actions=tuple(self.action(action.name) for action in self.base.actions),
            init=self.init,
            goal=self.goal,
            name=self.base.name,
        )


def _check_units(base: PlanningModel, units: Iterable[AbstractionUnit]) -> None:
    for unit in units:
        if not unit.fluents <= base.fluents:
            raise UnknownUnitError(unit.id)


def project(base: PlanningModel, spec: AbstractionSpec | Iterable[AbstractionUnit]) -> AbstractModel:
    if not isinstance(spec, AbstractionSpec):
        spec = AbstractionSpec.of(spec)
    _check_units(base, spec.units)
    return AbstractModel(base, spec)


def concretize(current: AbstractModel, unit: AbstractionUnit | str) -> AbstractModel:
    unit_id = unit.id if isinstance(unit, AbstractionUnit) else unit
    if unit_id not in current.spec:
        raise UnitNotDroppedError(unit_id)
    return AbstractModel(current.base, current.spec.without(unit_id))


def model_updates(base: PlanningModel, unit: AbstractionUnit) -> List[ModelUpdateMessage]:
    """Atualizações únicas de modelo que mencionam algum fluente da unidade.

    Para unidades de predicado (``unit.predicates``) a chave de uma atualização
    de ação é (esquema, tipo, nome do predicado): cópias aterradas do mesmo
    esquema contam uma vez, quaisquer que sejam os argumentos do fluente. Em
    unidades de fluente a chave usa o fluente aterrado. Fatos do estado inicial
    e da meta contam um a um.
    """
    found: Dict[tuple, ModelUpdateMessage] = {}

    def subject(fluent: Fluent) -> str:
        return fluent.predicate if fluent.predicate in unit.predicates else fluent.token

    def record(kind: str, fluent: Fluent, action: str = "") -> None:
        message = ModelUpdateMessage(unit.id, kind, subject(fluent) if action else fluent.token, action, fluent)
        found.setdefault(message.sort_key, message)

    members = unit.fluents
    for action in base.actions:
        if not action.fluents & members:
            continue
        schema = action.schema_name
        for fluent in action.prec & members:
            record("has-precondition", fluent, schema)
        for clause in action.effects:
            for fluent in clause.condition & members:
                record("has-effect-condition", fluent, schema)
            for fluent in clause.add & members:
                record("has-add-effect", fluent, schema)
            for fluent in clause.delete & members:
                record("has-delete-effect", fluent, schema)
    for fluent in base.init & members:
        record("in-initial-state", fluent)
    for fluent in base.goal & members:
        record("in-goal", fluent)
    return [found[key] for key in sorted(found)]


def unit_cost(base: PlanningModel, unit: AbstractionUnit) -> int:
    return len(model_updates(base, unit))


def unit_costs(base: PlanningModel, units: Sequence[AbstractionUnit]) -> Mapping[str, int]:
    return {unit.id: unit_cost(base, unit) for unit in units}

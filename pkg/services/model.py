# -*- coding: utf-8 -*-
"""Tipos do modelo proposicional aterrado ⟨P, A, I, G⟩.

Estados nunca são enumerados: um estado é um frozenset de Fluent.
Todos os tipos são imutáveis e podem ser compartilhados entre threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Mapping, Tuple

State = FrozenSet["Fluent"]


@dataclass(frozen=True, order=True)
class Fluent:
    predicate: str
    args: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "predicate", self.predicate.lower())
        object.__setattr__(self, "args", tuple(str(arg).lower() for arg in self.args))

    @classmethod
    def parse(cls, text: str) -> "Fluent":
        """Aceita "(at w0)", "at w0" ou apenas "handempty"."""
        parts = text.strip().strip("()").split()
        if not parts:
            raise ValueError(f"Fluente vazio: {text!r}")
        return cls(parts[0], tuple(parts[1:]))

    @property
    def token(self) -> str:
        return "_".join((self.predicate, *self.args))

    def __str__(self) -> str:
        return "(" + " ".join((self.predicate, *self.args)) + ")"


def fluents(items: Iterable[str | Fluent]) -> FrozenSet[Fluent]:
    return frozenset(item if isinstance(item, Fluent) else Fluent.parse(item) for item in items)


@dataclass(frozen=True)
class EffectClause:
    condition: FrozenSet[Fluent] = frozenset()
    add: FrozenSet[Fluent] = frozenset()
    delete: FrozenSet[Fluent] = frozenset()
    nd: bool = False

    def __post_init__(self) -> None:
        overlap = self.add & self.delete
        if overlap:
            raise ValueError(f"Cláusula com add ∩ del não vazio: {sorted(map(str, overlap))}")

    @property
    def touched(self) -> FrozenSet[Fluent]:
        return self.condition | self.add | self.delete


@dataclass(frozen=True)
class GroundAction:
    name: str
    prec: FrozenSet[Fluent] = frozenset()
    effects: Tuple[EffectClause, ...] = ()
    # Origem no esquema levantado; não entra na igualdade estrutural.
    schema: str = field(default="", compare=False)
    args: Tuple[str, ...] = field(default=(), compare=False)

    @property
    def schema_name(self) -> str:
        return self.schema or self.name

    @property
    def deterministic(self) -> bool:
        return not any(clause.nd for clause in self.effects)

    @property
    def fluents(self) -> FrozenSet[Fluent]:
        found = set(self.prec)
        for clause in self.effects:
            found |= clause.touched
        return frozenset(found)


@dataclass(frozen=True)
class PlanningModel:
    fluents: FrozenSet[Fluent]
    actions: Tuple[GroundAction, ...]
    init: FrozenSet[Fluent]
    goal: FrozenSet[Fluent]
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions", tuple(sorted(self.actions, key=lambda action: action.name)))
        names = [action.name for action in self.actions]
        if len(names) != len(set(names)):
            raise ValueError("Nomes de ações repetidos no modelo.")
        if not self.init <= self.fluents or not self.goal <= self.fluents:
            raise ValueError("Estado inicial e meta devem estar contidos nos fluentes do modelo.")
        for action in self.actions:
            if not action.fluents <= self.fluents:
                raise ValueError(f"Ação {action.name} usa fluentes fora do modelo.")

    @cached_property
    def action_map(self) -> Mapping[str, GroundAction]:
        return {action.name: action for action in self.actions}

    @cached_property
    def predicates(self) -> Tuple[str, ...]:
        return tuple(sorted({fluent.predicate for fluent in self.fluents}))

    @cached_property
    def deterministic(self) -> bool:
        return all(action.deterministic for action in self.actions)

    def fluents_of(self, predicate: str) -> FrozenSet[Fluent]:
        return frozenset(fluent for fluent in self.fluents if fluent.predicate == predicate)

    def summary(self) -> Dict[str, int]:
        return {"fluents": len(self.fluents), "actions": len(self.actions), "init": len(self.init), "goal": len(self.goal)}


UPDATE_KINDS = (
    "has-precondition",
    "has-effect-condition",
    "has-add-effect",
    "has-delete-effect",
    "in-initial-state",
    "in-goal",
)
_KIND_ORDER = {kind: index for index, kind in enumerate(UPDATE_KINDS)}


@dataclass(frozen=True)
class ModelUpdateMessage:
    """Uma atualização única do modelo; ação vazia para estado inicial/meta."""

    unit_id: str
    kind: str
    subject: str
    action: str = ""
    fluent: Fluent | None = field(default=None, compare=False)

    @property
    def sort_key(self) -> tuple:
        return (self.unit_id, self.action, _KIND_ORDER[self.kind], self.subject)

    @property
    def text(self) -> str:
        if self.action:
            return f"{self.action}-{self.kind}-{self.subject}"
        return f"{self.subject}-{self.kind}"

    def __str__(self) -> str:
        return self.text

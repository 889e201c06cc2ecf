# -*- coding: utf-8 -*-
"""Reticulado completo e implícito sobre as unidades de abstração.

Um nó é um AbstractionSpec; arestas e nós nunca são armazenados. A região
consistente com os foils é fechada para cima em Λ, o que permite a busca em
níveis com poda de superconjuntos em min_abstraction_set.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from services.abstraction import AbstractionSpec, AbstractionUnit, unit_costs
from services.errors import (
    EnumerationLimitError,
    InconsistentFoilsError,
    InvalidFoilError,
    LatticeConfigError,
    UnknownUnitError,
)
from services.execution import Foil, FoilValidator
from services.model import Fluent, PlanningModel

logger = logging.getLogger(__name__)

DEFAULT_ENUM_CAP = 16


@dataclass(frozen=True)
class LatticeSpec:
    base: PlanningModel
    units: Tuple[AbstractionUnit, ...]
    complete: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "units", tuple(sorted(self.units, key=lambda unit: unit.id)))
        seen: Dict[Fluent, str] = {}
        ids = [unit.id for unit in self.units]
        if len(ids) != len(set(ids)):
            raise LatticeConfigError("Identificadores de unidade repetidos.")
        for unit in self.units:
            if not unit.fluents <= self.base.fluents:
                missing = sorted(map(str, unit.fluents - self.base.fluents))[:3]
                raise LatticeConfigError(f"Unidade {unit.id!r} usa fluentes fora do modelo: {missing}")
            for fluent in unit.fluents:
                if fluent in seen:
                    raise LatticeConfigError(f"Unidades {seen[fluent]!r} e {unit.id!r} compartilham {fluent}.")
                seen[fluent] = unit.id

    @cached_property
    def unit_map(self) -> Mapping[str, AbstractionUnit]:
        return {unit.id: unit for unit in self.units}

    @cached_property
    def costs(self) -> Mapping[str, int]:
        return unit_costs(self.base, self.units)

    @property
    def total_cost(self) -> int:
        return sum(self.costs.values())

    @property
    def ids(self) -> Tuple[str, ...]:
        return tuple(unit.id for unit in self.units)

    def unit(self, unit_id: str) -> AbstractionUnit:
        try:
            return self.unit_map[unit_id]
        except KeyError as exc:
            raise UnknownUnitError(unit_id) from exc

    def spec(self, unit_ids: Iterable[str] = ()) -> AbstractionSpec:
        return AbstractionSpec.of(self.unit(unit_id) for unit_id in unit_ids)

    @property
    def bottom(self) -> AbstractionSpec:
        return AbstractionSpec()

    @property
    def top(self) -> AbstractionSpec:
        return AbstractionSpec(self.units)

    def without(self, unit_id: str) -> "LatticeSpec":
        """Reticulado em que a unidade deixa de ser abstraível."""
        self.unit(unit_id)
        return LatticeSpec(self.base, tuple(unit for unit in self.units if unit.id != unit_id), self.complete)


@dataclass(frozen=True)
class MinimalAbstractionSet:
    specs: Tuple[AbstractionSpec, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "specs", tuple(sorted(set(self.specs), key=lambda spec: (len(spec), spec.ids))))

    def __iter__(self):
        return iter(self.specs)

    def __len__(self) -> int:
        return len(self.specs)

    @property
    def id_sets(self) -> Tuple[Tuple[str, ...], ...]:
        return tuple(spec.ids for spec in self.specs)

    @cached_property
    def dropped_ids(self) -> Tuple[str, ...]:
        return tuple(sorted({unit_id for spec in self.specs for unit_id in spec.ids}))


def minimal_elements(specs: Iterable[AbstractionSpec]) -> MinimalAbstractionSet:
    """Antichain dos elementos ⊆-minimais."""
    ordered = sorted(set(specs), key=lambda spec: (len(spec), spec.ids))
    kept: List[AbstractionSpec] = []
    for spec in ordered:
        if not any(other.id_set <= spec.id_set for other in kept):
            kept.append(spec)
    return MinimalAbstractionSet(tuple(kept))


def _validator(lattice: LatticeSpec, validator: FoilValidator | None) -> FoilValidator:
    if validator is not None and validator.base is lattice.base:
        return validator
    return FoilValidator(lattice.base)


def min_abstraction_set(
    lattice: LatticeSpec,
    foils: Sequence[Foil],
    *,
    validator: FoilValidator | None = None,
) -> MinimalAbstractionSet:
    if not foils:
        raise InvalidFoilError("O conjunto de foils não pode ser vazio.")
    if not lattice.complete:
        raise LatticeConfigError("A busca de M_min exige um reticulado completo.")
    checker = _validator(lattice, validator)
    if not checker.all_valid(lattice.top, foils):
        raise InconsistentFoilsError(
            "Os foils não valem em nenhum membro do reticulado, nem com todas as unidades abstraídas."
        )

    found: List[AbstractionSpec] = []
    ids = lattice.ids
    for size in range(len(ids) + 1):
        for combo in combinations(ids, size):
            chosen = frozenset(combo)
            if any(spec.id_set <= chosen for spec in found):
                continue
            spec = lattice.spec(combo)
            if checker.all_valid(spec, foils):
                found.append(spec)
    result = MinimalAbstractionSet(tuple(found))
    logger.info(
        "lattice_min_set units=%d foils=%d members=%s checks=%d",
        len(ids),
        len(foils),
        ";".join(spec.label() for spec in result),
        checker.checks,
    )
    return result


def consistent_models(
    lattice: LatticeSpec,
    foils: Sequence[Foil],
    *,
    cap: int = DEFAULT_ENUM_CAP,
    validator: FoilValidator | None = None,
) -> List[AbstractionSpec]:
    if len(lattice.units) > cap:
        raise EnumerationLimitError(
            f"Enumeração do reticulado limitada a {cap} unidades; recebidas {len(lattice.units)}.",
            limit=cap,
        )
    checker = _validator(lattice, validator)
    ids = lattice.ids
    result: List[AbstractionSpec] = []
    for size in range(len(ids) + 1):
        for combo in combinations(ids, size):
            spec = lattice.spec(combo)
            if checker.all_valid(spec, foils):
                result.append(spec)
    return result


def concretize_min_set(m_min: Iterable[AbstractionSpec], unit_id: str) -> MinimalAbstractionSet:
    """Aplica γ_p a cada membro de M_min sem revisitar o reticulado."""
    return minimal_elements(spec.without(unit_id) for spec in m_min)


def abstractable_predicates(model: PlanningModel) -> Tuple[str, ...]:
    """Predicados que aparecem em alguma ação ou na meta (os estáticos já foram compilados)."""
    found = {fluent.predicate for fluent in model.goal}
    for action in model.actions:
        found.update(fluent.predicate for fluent in action.fluents)
    return tuple(sorted(found))


def _units_for(model: PlanningModel, predicates: Iterable[str], granularity: str) -> List[AbstractionUnit]:
    units: List[AbstractionUnit] = []
    for predicate in predicates:
        if granularity == "fluent":
            units.extend(
                AbstractionUnit(fluent.token, frozenset({fluent})) for fluent in sorted(model.fluents_of(predicate))
            )
        else:
            units.append(AbstractionUnit.for_predicate(model, predicate))
    return units


def generate_lattice_config(
    model: PlanningModel,
    fraction: float,
    seed: int,
    *,
    granularity: str = "predicate",
    exclude: Iterable[str] = (),
) -> LatticeSpec:
    if not 0 < fraction <= 1:
        raise LatticeConfigError(f"Fração deve estar em (0, 1]; recebida {fraction}.")
    if granularity not in ("predicate", "fluent"):
        raise LatticeConfigError(f"Granularidade desconhecida: {granularity!r}.")
    excluded = set(exclude)
    candidates = [predicate for predicate in abstractable_predicates(model) if predicate not in excluded]
    if not candidates:
        raise LatticeConfigError("Modelo sem predicados abstraíveis.")
    count = math.ceil(fraction * len(candidates))
    rng = np.random.default_rng(seed)
    picked = sorted(candidates[int(index)] for index in rng.choice(len(candidates), size=count, replace=False))
    logger.info("lattice_generated fraction=%.2f seed=%d predicates=%s", fraction, seed, ",".join(picked))
    return LatticeSpec(model, tuple(_units_for(model, picked, granularity)), complete=True)


def lattice_from_config(
    model: PlanningModel,
    config: Mapping[str, Any],
    *,
    default_granularity: str = "predicate",
) -> LatticeSpec:
    """Aceita {"units": {...}} ou {"fraction", "seed", "granularity", "exclude"}."""
    if "units" in config:
        raw_units = config["units"]
        if not isinstance(raw_units, Mapping) or not raw_units:
            raise LatticeConfigError("'units' deve ser um objeto não vazio: id → lista de predicados/fluentes.")
        units: List[AbstractionUnit] = []
        for unit_id, entries in raw_units.items():
            if isinstance(entries, str):
                entries = [entries]
            members: set = set()
            predicates: List[str] = []
            for entry in entries:
                text = str(entry).strip().lower()
                if text.startswith("(") or " " in text:
                    fluent = Fluent.parse(text)
                    if fluent not in model.fluents:
                        raise LatticeConfigError(f"Unidade {unit_id!r}: fluente {fluent} não existe no modelo.")
                    members.add(fluent)
                else:
                    found = model.fluents_of(text)
                    if not found:
                        raise LatticeConfigError(f"Unidade {unit_id!r}: predicado {text!r} não existe no modelo.")
                    members |= found
                    predicates.append(text)
            if not members:
                raise LatticeConfigError(f"Unidade {unit_id!r} vazia.")
            units.append(AbstractionUnit(str(unit_id), frozenset(members), tuple(predicates)))
        return LatticeSpec(model, tuple(units), complete=bool(config.get("complete", True)))
    if "fraction" in config:
        try:
            fraction = float(config["fraction"])
            seed = int(config.get("seed", 0))
        except (TypeError, ValueError) as exc:
            raise LatticeConfigError(f"Configuração de sorteio inválida: {exc}") from exc
        return generate_lattice_config(
            model,
            fraction,
            seed,
            granularity=str(config.get("granularity", default_granularity)),
            exclude=config.get("exclude", ()),
        )
    raise LatticeConfigError("Configuração do reticulado precisa de 'units' ou 'fraction'.")


def load_lattice_config(path: str | Path) -> Dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise LatticeConfigError(f"JSON inválido em {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise LatticeConfigError(f"{path}: esperado objeto JSON.")
    return data

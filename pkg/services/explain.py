# -*- coding: utf-8 -*-
"""Busca de explicações sobre conjuntos de concretizações.

Um estado de busca é o CONJUNTO de unidades já explicadas; a ordem não importa
porque as concretizações comutam. O teste de meta é sempre exato: E explica F
quando todo foil falha em Λ − E para todo Λ de M_min.
"""
from __future__ import annotations

import heapq
import logging
import math
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Sequence, Tuple

from services.abstraction import AbstractionUnit, project
from services.errors import EnumerationLimitError, InfeasibleCoverError, NoExplanationError, UnknownMethodError
from services.execution import DEFAULT_BELIEF_CAP, Foil, FoilValidator, resolution_set, validate_plan_nd
from services.lattice import LatticeSpec, MinimalAbstractionSet, min_abstraction_set, minimal_elements

logger = logging.getLogger(__name__)

DEFAULT_ORACLE_CAP = 12
METHODS = ("blind", "astar", "greedy", "oracle")
METHOD_ALIASES = {"heuristic": "astar", "a*": "astar", "brute": "oracle"}


@dataclass(frozen=True)
class Explanation:
    units: Tuple[AbstractionUnit, ...]
    cost: int
    unit_costs: Mapping[str, int] = field(default_factory=dict)
    method: str = ""
    expanded: int = 0

    @property
    def ids(self) -> Tuple[str, ...]:
        return tuple(unit.id for unit in self.units)

    @property
    def size(self) -> int:
        return len(self.units)


@dataclass(frozen=True)
class SearchNode:
    explained: FrozenSet[str]
    remaining_foils: FrozenSet[Foil]
    g_cost: int


class ExplanationProblem:
    """Agrupa base, reticulado, foils, M_min, custos e caches de validação.

    trust_union=True pré-calcula uma vez os conjuntos de resolução contra M_min e
    assume que a união de unidades resolve só o que cada uma resolve sozinha.
    Com False, os conjuntos são recalculados contra os modelos carregados
    adiante (γ aplicado a M_min) para cada conjunto explicado.
    """

    def __init__(
        self,
        lattice: LatticeSpec,
        foils: Sequence[Foil],
        *,
        m_min: MinimalAbstractionSet | None = None,
        validator: FoilValidator | None = None,
        trust_union: bool = True,
        belief_cap: int = DEFAULT_BELIEF_CAP,
    ):
        self.lattice = lattice
        self.base = lattice.base
        self.foils: Tuple[Foil, ...] = tuple(dict.fromkeys(foil.resolve(lattice.base) for foil in foils))
        self.validator = validator if validator is not None and validator.base is lattice.base else FoilValidator(
            lattice.base, belief_cap=belief_cap
        )
        self.trust_union = trust_union
        if m_min is None:
            m_min = (
                min_abstraction_set(lattice, self.foils, validator=self.validator)
                if self.foils
                else MinimalAbstractionSet((lattice.bottom,))
            )
        self.m_min = m_min
        self.costs: Mapping[str, int] = lattice.costs
        self.candidates: Tuple[str, ...] = m_min.dropped_ids
        self._precomputed: Dict[str, FrozenSet[Foil]] = {}
        self._lazy: Dict[Tuple[FrozenSet[str], str], FrozenSet[Foil]] = {}
        self._overapprox: Dict[str, FrozenSet[Foil]] = {}
        self.union_violations = 0

    # ── validade ────────────────────────────────────────────────────────────

    def residual(self, explained: Iterable[str]) -> MinimalAbstractionSet:
        """M_min levado adiante: γ_E aplicado a cada membro."""
        drop = tuple(explained)
        return minimal_elements(spec.without(*drop) for spec in self.m_min)

    def explains(self, explained: Iterable[str]) -> bool:
        drop = tuple(explained)
        for spec in self.m_min:
            reduced = spec.without(*drop)
            if any(self.validator.is_valid(reduced, foil) for foil in self.foils):
                return False
        return True

    def remaining_exact(self, explained: Iterable[str]) -> FrozenSet[Foil]:
        drop = tuple(explained)
        reduced = [spec.without(*drop) for spec in self.m_min]
        return frozenset(
            foil for foil in self.foils if any(self.validator.is_valid(spec, foil) for spec in reduced)
        )

    # ── conjuntos de resolução ──────────────────────────────────────────────

    def resolution(self, unit_id: str, explained: FrozenSet[str] = frozenset()) -> FrozenSet[Foil]:
        if self.trust_union or not explained:
            if unit_id not in self._precomputed:
                models = [self.validator.model(spec) for spec in self.m_min]
                self._precomputed[unit_id] = resolution_set(
                    models, self.foils, unit_id, strict=False, validator=self.validator
                )
            return self._precomputed[unit_id]
        key = (explained, unit_id)
        if key not in self._lazy:
            models = [self.validator.model(spec) for spec in self.residual(explained)]
            self._lazy[key] = resolution_set(models, self.foils, unit_id, strict=False, validator=self.validator)
        return self._lazy[key]

    def remaining(self, explained: FrozenSet[str]) -> FrozenSet[Foil]:
        if not self.trust_union:
            return self.remaining_exact(explained)
        return self.union_gap(explained)

    def union_gap(self, explained: Iterable[str]) -> FrozenSet[Foil]:
        """Foils fora da união dos conjuntos de resolução individuais."""
        resolved: set = set()
        for unit_id in explained:
            resolved |= self.resolution(unit_id)
        return frozenset(self.foils) - resolved

    def max_resolution_size(self) -> int:
        return max((len(self.resolution(unit_id)) for unit_id in self.candidates), default=0)

    def overapprox(self, unit_id: str) -> FrozenSet[Foil]:
        """Foils cujas ações mencionam a unidade em precondição/condição, ou meta que a menciona."""
        if unit_id not in self._overapprox:
            members = self.lattice.unit(unit_id).fluents
            in_goal = bool(self.base.goal & members)
            hits = []
            for foil in self.foils:
                mentioned = in_goal
                for name in foil.actions:
                    if mentioned:
                        break
                    action = self.base.action_map[name]
                    if action.prec & members or any(clause.condition & members for clause in action.effects):
                        mentioned = True
                if mentioned:
                    hits.append(foil)
            self._overapprox[unit_id] = frozenset(hits)
        return self._overapprox[unit_id]

    # ── resultados ──────────────────────────────────────────────────────────

    def node(self, explained: FrozenSet[str]) -> SearchNode:
        return SearchNode(explained, self.remaining(explained), self.cost_of(explained))

    def cost_of(self, explained: Iterable[str]) -> int:
        return sum(self.costs[unit_id] for unit_id in explained)

    def explanation(self, explained: Iterable[str], *, method: str, expanded: int = 0) -> Explanation:
        ids = sorted(explained)
        return Explanation(
            units=tuple(self.lattice.unit(unit_id) for unit_id in ids),
            cost=self.cost_of(ids),
            unit_costs={unit_id: self.costs[unit_id] for unit_id in ids},
            method=method,
            expanded=expanded,
        )

    def require_feasible(self) -> None:
        if not self.explains(self.candidates):
            raise NoExplanationError(
                "Nenhuma concretização explica os foils: algum foil vale no próprio modelo base."
            )


def verify_explanation(problem: ExplanationProblem, explanation: Explanation) -> bool:
    """Revalida do zero, sem cache nem conjuntos de resolução."""
    drop = explanation.ids
    for spec in problem.m_min:
        model = project(problem.base, spec.without(*drop))
        for foil in problem.foils:
            if validate_plan_nd(model, foil, belief_cap=problem.validator.belief_cap):
                return False
    return True


# ── busca best-first (cega e A*) ─────────────────────────────────────────────

Heuristic = Callable[[ExplanationProblem, SearchNode], int]


def _zero(problem: ExplanationProblem, node: SearchNode) -> int:
    return 0


def _best_first(problem: ExplanationProblem, heuristic: Heuristic, method: str) -> Explanation:
    started = time.perf_counter()
    problem.require_feasible()
    start: FrozenSet[str] = frozenset()
    frontier: List[Tuple[int, int, Tuple[str, ...], FrozenSet[str]]] = [
        (heuristic(problem, problem.node(start)), 0, (), start)
    ]
    closed: set = set()
    expanded = 0
    while frontier:
        _, g_cost, ids, explained = heapq.heappop(frontier)
        if explained in closed:
            continue
        closed.add(explained)
        if problem.explains(explained):
            result = problem.explanation(explained, method=method, expanded=expanded)
            logger.info(
                "search_complete method=%s cost=%d units=%s expanded=%d elapsed_s=%.3f",
                method,
                result.cost,
                ",".join(result.ids) or "-",
                expanded,
                time.perf_counter() - started,
            )
            return result
        expanded += 1
        last = ids[-1] if ids else ""
        # Extensão canônica: cada conjunto é gerado por um único caminho ordenado.
        for unit_id in problem.candidates:
            if unit_id <= last:
                continue
            child = explained | {unit_id}
            child_g = g_cost + problem.costs[unit_id]
            child_h = heuristic(problem, problem.node(child)) if heuristic is not _zero else 0
            heapq.heappush(frontier, (child_g + child_h, child_g, tuple(sorted(child)), child))
    raise InfeasibleCoverError("Busca esgotou o espaço de concretizações sem explicação.")


def blind_search(problem: ExplanationProblem) -> Explanation:
    return _best_first(problem, _zero, "blind")


def _argmin_ratio(
    options: Iterable[str],
    gain: Callable[[str], int],
    costs: Mapping[str, int],
) -> str | None:
    best: Tuple[float, int, str] | None = None
    for unit_id in options:
        size = gain(unit_id)
        if size <= 0:
            continue
        key = (costs[unit_id] / size, costs[unit_id], unit_id)
        if best is None or key < best:
            best = key
    return best[2] if best else None


def heuristic_estimate(problem: ExplanationProblem, node: SearchNode) -> int:
    """Custo da cobertura gulosa usando conjuntos de resolução sobre-aproximados."""
    if not node.remaining_foils:
        return 0
    available = [unit_id for unit_id in problem.candidates if unit_id not in node.explained]
    sets = {unit_id: problem.overapprox(unit_id) & node.remaining_foils for unit_id in available}
    uncovered = set(node.remaining_foils)
    total = 0
    while uncovered:
        best = _argmin_ratio(sets, lambda unit_id: len(sets[unit_id] & uncovered), problem.costs)
        if best is None:
            return sum(problem.costs[unit_id] for unit_id in available)
        total += problem.costs[best]
        uncovered -= sets.pop(best)
    return total


def astar_search(problem: ExplanationProblem, *, heuristic: str = "overapprox") -> Explanation:
    if heuristic == "zero":
        return _best_first(problem, _zero, "astar")
    if heuristic != "overapprox":
        raise UnknownMethodError(f"Heurística desconhecida: {heuristic!r}; use overapprox ou zero.")
    return _best_first(problem, heuristic_estimate, "astar")


# ── cobertura gulosa ─────────────────────────────────────────────────────────

def _pairwise_choice(problem: ExplanationProblem, explained: FrozenSet[str], available: Sequence[str]) -> str:
    """Progresso exato em pares (modelo, foil) quando nenhuma unidade resolve foils sozinha."""
    drop = tuple(explained)
    reduced = [spec.without(*drop) for spec in problem.m_min]
    live = [(spec, foil) for spec in reduced for foil in problem.foils if problem.validator.is_valid(spec, foil)]

    def refuted(unit_id: str) -> int:
        return sum(1 for spec, foil in live if not problem.validator.is_valid(spec.without(unit_id), foil))

    best = _argmin_ratio(available, refuted, problem.costs)
    if best is None:
        best = min(available, key=lambda unit_id: (problem.costs[unit_id], unit_id))
    return best


def greedy_cover(problem: ExplanationProblem) -> Explanation:
    started = time.perf_counter()
    problem.require_feasible()
    explained: FrozenSet[str] = frozenset()
    remaining = set(problem.foils)
    rounds = 0
    while not problem.explains(explained):
        available = [unit_id for unit_id in problem.candidates if unit_id not in explained]
        if not available:
            raise InfeasibleCoverError("Nenhuma unidade restante resolve os foils pendentes.")
        gains = {unit_id: problem.resolution(unit_id, explained) & remaining for unit_id in available}
        best = _argmin_ratio(available, lambda unit_id: len(gains[unit_id]), problem.costs)
        if best is None:
            problem.union_violations += 1
            logger.warning(
                "union_violation explained=%s remaining=%d policy=%s",
                ",".join(sorted(explained)) or "-",
                len(remaining),
                "trust_union" if problem.trust_union else "recompute",
            )
            best = _pairwise_choice(problem, explained, available)
        remaining -= gains[best]
        explained = explained | {best}
        rounds += 1
    result = problem.explanation(explained, method="greedy", expanded=rounds)
    logger.info(
        "search_complete method=greedy cost=%d units=%s expanded=%d elapsed_s=%.3f",
        result.cost,
        ",".join(result.ids) or "-",
        rounds,
        time.perf_counter() - started,
    )
    return result


# ── oráculo ──────────────────────────────────────────────────────────────────

def brute_force_oracle(problem: ExplanationProblem, *, cap: int = DEFAULT_ORACLE_CAP) -> Explanation:
    candidates = problem.candidates
    if len(candidates) > cap:
        raise EnumerationLimitError(
            f"Oráculo limitado a {cap} unidades candidatas; recebidas {len(candidates)}.",
            limit=cap,
        )
    subsets = [combo for size in range(len(candidates) + 1) for combo in combinations(candidates, size)]
    subsets.sort(key=lambda combo: (problem.cost_of(combo), len(combo), combo))
    for combo in subsets:
        if problem.explains(combo):
            return problem.explanation(combo, method="oracle", expanded=len(subsets))
    raise NoExplanationError("Nenhuma concretização explica os foils: algum foil vale no próprio modelo base.")


def harmonic(k: int) -> float:
    return sum(1.0 / i for i in range(1, k + 1))


def ln_factor(k: int) -> float:
    return max(1.0, math.log(k) if k > 0 else 0.0)


def greedy_within_ln_bound(greedy_cost: int, optimal_cost: int, k: int) -> bool:
    """Custo ≤ max(1, ln k)·ótimo. Não é garantia para k pequeno; só é reportado."""
    return greedy_cost <= ln_factor(k) * optimal_cost + 1e-9


def greedy_within_bound(greedy_cost: int, optimal_cost: int, k: int) -> bool:
    """Garantia da cobertura gulosa ponderada: custo ≤ H(k)·ótimo."""
    if not greedy_within_ln_bound(greedy_cost, optimal_cost, k):
        logger.warning(
            "greedy_bound_exceeded greedy=%d optimal=%d k=%d ln_k=%.3f",
            greedy_cost,
            optimal_cost,
            k,
            math.log(k) if k > 0 else 0.0,
        )
    return greedy_cost <= max(1.0, harmonic(k)) * optimal_cost + 1e-9


def run_method(problem: ExplanationProblem, method: str, *, oracle_cap: int = DEFAULT_ORACLE_CAP) -> Explanation:
    name = METHOD_ALIASES.get(method, method)
    if name == "blind":
        return blind_search(problem)
    if name == "astar":
        return astar_search(problem)
    if name == "greedy":
        return greedy_cover(problem)
    if name == "oracle":
        return brute_force_oracle(problem, cap=oracle_cap)
    raise UnknownMethodError(f"Método desconhecido: {method!r}; use um de {', '.join(METHODS)}.")

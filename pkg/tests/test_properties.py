"""Propriedades do reticulado, da validação e da busca sobre instâncias aleatórias."""
import time
from itertools import combinations

import numpy as np
import pytest

from services.abstraction import AbstractionUnit, project, project_action, unit_cost, unit_costs
from services.errors import NoExplanationError
from services.execution import Foil, apply_action, resolution_set, validate_plan
from services.explain import (
    ExplanationProblem,
    astar_search,
    blind_search,
    brute_force_oracle,
    greedy_cover,
    harmonic,
)
from tests.factories import random_instances, set_cover_instance, validator_for


def every_spec(lattice):
    ids = lattice.ids
    for size in range(len(ids) + 1):
        for combo in combinations(ids, size):
            yield lattice.spec(combo)


def random_split(rng, ids):
    """Par (Λ, Λ′) com Λ ⊆ Λ′, sorteado unidade a unidade."""
    outer = [unit_id for unit_id in ids if rng.random() < 0.6]
    inner = [unit_id for unit_id in outer if rng.random() < 0.5]
    return inner, outer


def random_walks(instance, rng, *, walks=6, max_steps=15):
    """Planos válidos na base, obtidos por passeios entre ações aplicáveis."""
    base = instance.base
    found = []
    for walk in range(walks):
        state = base.init
        steps = []
        while len(steps) < max_steps and not base.goal <= state:
            applicable = [action for action in base.actions if action.prec <= state]
            if not applicable:
                break
            chosen = applicable[int(rng.integers(len(applicable)))]
            steps.append(chosen.name)
            state = apply_action(state, chosen)
        foil = Foil(tuple(steps), f"P{walk + 1}")
        if validate_plan(base, foil) and foil not in found:
            found.append(foil)
    return found


def oracle_problems():
    for instance in random_instances():
        problem = ExplanationProblem(instance.lattice, instance.foils, validator=validator_for(instance.lattice))
        try:
            optimal = brute_force_oracle(problem)
        except NoExplanationError:
            continue
        yield instance, problem, optimal


# ── projeção ────────────────────────────────────────────────────────────────

def test_projection_order_does_not_matter():
    rng = np.random.default_rng(7)
    for instance in random_instances():
        lattice = instance.lattice
        first, second = random_split(rng, lattice.ids)
        second = [unit_id for unit_id in second if unit_id not in first]
        spec_a, spec_b = lattice.spec(first), lattice.spec(second)

        together = project(instance.base, spec_a.union(spec_b.units)).model
        a_then_b = project(project(instance.base, spec_a).model, spec_b).model
        b_then_a = project(project(instance.base, spec_b).model, spec_a).model

        assert a_then_b == together
        assert b_then_a == together


def test_projection_is_idempotent():
    for instance in random_instances():
        for spec in every_spec(instance.lattice):
            abstract = project(instance.base, spec)
            assert project(instance.base, spec.union(spec.units)).model == abstract.model
            for action in abstract.model.actions:
                assert project_action(action, spec.removed) == action


# ── validade ────────────────────────────────────────────────────────────────

def test_plans_valid_in_base_stay_valid_in_every_abstraction():
    rng = np.random.default_rng(11)
    checked = 0
    for instance in random_instances():
        plans = random_walks(instance, rng)
        validator = validator_for(instance.lattice)
        for plan in plans:
            for spec in every_spec(instance.lattice):
                assert validator.is_valid(spec, plan), (instance.seed, plan.actions, spec.label())
            checked += 1
    assert checked > 0


def test_validity_is_monotone_over_random_nested_abstractions():
    rng = np.random.default_rng(2024)
    instances = random_instances()
    validators = {instance.seed: validator_for(instance.lattice) for instance in instances}
    held = 0
    for _ in range(1000):
        instance = instances[int(rng.integers(len(instances)))]
        lattice = instance.lattice
        inner, outer = random_split(rng, lattice.ids)
        if rng.random() < 0.5:
            foil = instance.foils[int(rng.integers(len(instance.foils)))]
        else:
            names = [action.name for action in instance.base.actions]
            size = int(rng.integers(1, 6))
            foil = Foil(tuple(names[int(index)] for index in rng.integers(len(names), size=size)), "aleatório")
        validator = validators[instance.seed]
        small, large = lattice.spec(inner), lattice.spec(outer)
        assert small <= large
        if validator.is_valid(small, foil):
            held += 1
            assert validator.is_valid(large, foil), (instance.seed, foil.actions, small.label(), large.label())
    assert held > 0


# ── custo ───────────────────────────────────────────────────────────────────

def test_unit_costs_add_up_over_unions():
    rng = np.random.default_rng(5)
    for instance in random_instances():
        lattice, base = instance.lattice, instance.base
        problem = ExplanationProblem(lattice, instance.foils, validator=validator_for(lattice))
        alone = {unit.id: unit_cost(base, unit) for unit in lattice.units}
        assert unit_costs(base, lattice.units) == alone

        chosen, _ = random_split(rng, lattice.ids)
        assert problem.cost_of(chosen) == sum(alone[unit_id] for unit_id in chosen)
        assert problem.explanation(chosen, method="oracle").cost == sum(alone[unit_id] for unit_id in chosen)
        if len(chosen) >= 2:
            units = [lattice.unit(unit_id) for unit_id in chosen]
            merged = AbstractionUnit(
                "+".join(chosen),
                frozenset().union(*(unit.fluents for unit in units)),
                tuple(predicate for unit in units for predicate in unit.predicates),
            )
            assert unit_cost(base, merged) == sum(alone[unit_id] for unit_id in chosen)


# ── conjuntos de resolução ──────────────────────────────────────────────────

def test_union_resolves_at_least_what_each_unit_resolves():
    for instance, problem, _ in oracle_problems():
        candidates = problem.candidates
        for first, second in combinations(candidates, 2):
            resolved = frozenset(problem.foils) - problem.remaining_exact((first, second))
            assert problem.resolution(first) | problem.resolution(second) <= resolved, instance.seed


def test_resolution_set_shrinks_as_the_model_grows_more_abstract():
    rng = np.random.default_rng(13)
    for instance in random_instances():
        lattice = instance.lattice
        validator = validator_for(lattice)
        for _ in range(4):
            inner, outer = random_split(rng, lattice.ids)
            if not inner:
                continue
            unit_id = inner[int(rng.integers(len(inner)))]
            small, large = validator.model(lattice.spec(inner)), validator.model(lattice.spec(outer))
            from_small = resolution_set([small], instance.foils, unit_id, validator=validator)
            from_large = resolution_set([large], instance.foils, unit_id, validator=validator)
            assert from_large <= from_small, (instance.seed, unit_id, inner, outer)


def test_overapprox_contains_resolution_set():
    for instance, problem, _ in oracle_problems():
        for unit_id in problem.candidates:
            assert problem.resolution(unit_id) <= problem.overapprox(unit_id), (instance.seed, unit_id)


# ── busca ───────────────────────────────────────────────────────────────────

def test_greedy_stays_within_harmonic_factor_of_optimum():
    checked = 0
    for instance, problem, optimal in oracle_problems():
        greedy = greedy_cover(problem)
        k = problem.max_resolution_size()
        assert optimal.cost <= greedy.cost <= max(1.0, harmonic(k)) * optimal.cost + 1e-9, instance.seed
        checked += 1
    assert checked > 0


def ring(n_units):
    """Cobertura em anel: o foil i exige concretizar u_i ou u_{i+1}."""
    return set_cover_instance([[index, (index + 1) % n_units] for index in range(n_units)], [0] * n_units)


@pytest.mark.parametrize("sizes", [(4, 6, 8, 10)])
def test_heuristic_search_outpaces_blind_search_as_instances_grow(sizes):
    blind_expanded = []
    astar_total = 0
    blind_time = greedy_time = 0.0
    for n_units in sizes:
        lattice, foils = ring(n_units)
        runs = {}
        for method, search in (("blind", blind_search), ("astar", astar_search), ("greedy", greedy_cover)):
            problem = ExplanationProblem(lattice, foils, validator=validator_for(lattice))
            started = time.perf_counter()
            runs[method] = search(problem)
            elapsed = time.perf_counter() - started
            if method == "blind":
                blind_time += elapsed
            elif method == "greedy":
                greedy_time += elapsed

        # Ótimo do anel: ⌈n/2⌉ unidades de custo 2.
        assert runs["blind"].cost == 2 * ((n_units + 1) // 2)
        assert runs["greedy"].expanded < runs["blind"].expanded
        blind_expanded.append(runs["blind"].expanded)
        astar_total += runs["astar"].expanded

    assert blind_expanded == sorted(blind_expanded)
    assert blind_expanded[-1] > 4 * blind_expanded[0]
    assert astar_total <= sum(blind_expanded)
    assert greedy_time < blind_time

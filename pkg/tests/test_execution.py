from itertools import product

import pytest

from services.abstraction import AbstractModel, project
from services.errors import BeliefStateLimitError, NonDeterministicModelError, UnitNotDroppedError, UnknownActionError
from services.execution import (
    Foil,
    FoilValidator,
    apply_action,
    normalize_action_name,
    resolution_set,
    successors,
    validate_plan,
    validate_plan_nd,
)
from tests.factories import action, clause, fs, mini_rover, model, random_instances


def test_normalize_action_name_variants():
    assert normalize_action_name("(Navigate W0 W1)") == "navigate_w0_w1"
    assert normalize_action_name("navigate w0 w1") == "navigate_w0_w1"
    assert normalize_action_name("navigate_w0_w1") == "navigate_w0_w1"


def test_apply_action_is_noop_when_precondition_fails():
    act = action("go", ("at a",), clause((), ("at b",), ("at a",)))
    state = fs("at c")
    assert apply_action(state, act) == state


def test_apply_action_fires_satisfied_clauses_together():
    act = action(
        "go",
        ("at a",),
        clause((), ("at b",), ("at a",)),
        clause(("fuel",), ("moved",), ("fuel",)),
        clause(("broken",), ("stuck",)),
    )
    assert apply_action(fs("at a", "fuel"), act) == fs("at b", "moved")


def test_apply_action_rejects_nd_clauses():
    act = action("go", (), clause((), ("x",), nd=True))
    with pytest.raises(NonDeterministicModelError):
        apply_action(frozenset(), act)


def test_validate_plan_on_mini_rover():
    inputs = mini_rover()
    assert validate_plan(inputs.model, inputs.plan)
    assert not validate_plan(inputs.model, inputs.foils[0])
    with pytest.raises(UnknownActionError):
        validate_plan(inputs.model, Foil(("fly_w0",)))


def test_foil_valid_once_battery_is_abstracted():
    inputs = mini_rover()
    lattice = inputs.lattice
    foil = inputs.foils[0]
    assert not validate_plan_nd(project(inputs.model, lattice.spec(["battery_75"])), foil)
    assert validate_plan_nd(project(inputs.model, lattice.spec(["battery_25", "battery_75"])), foil)
    assert validate_plan_nd(project(inputs.model, lattice.top), foil)


def test_validate_plan_nd_agrees_with_deterministic_semantics():
    inputs = mini_rover()
    concrete = project(inputs.model, inputs.lattice.bottom)
    for foil in (inputs.plan, *inputs.foils):
        assert validate_plan_nd(concrete, foil) == validate_plan(inputs.model, foil)


def _choices(state, act):
    """Enumeração ingênua: cada cláusula ND satisfeita dispara ou não."""
    if not act.prec <= state:
        return {state}
    fixed = [c for c in act.effects if c.condition <= state and not c.nd]
    optional = [c for c in act.effects if c.condition <= state and c.nd]
    found = set()
    for mask in product((False, True), repeat=len(optional)):
        chosen = fixed + [c for c, on in zip(optional, mask) if on]
        adds = frozenset().union(*(c.add for c in chosen))
        dels = frozenset().union(*(c.delete for c in chosen))
        found.add(frozenset((state | adds) - dels))
    return found


def _naive_valid(abstract: AbstractModel, foil: Foil) -> bool:
    def run(state, steps):
        if not steps:
            return abstract.goal <= state
        return any(run(nxt, steps[1:]) for nxt in _choices(state, abstract.action(steps[0])))

    return run(abstract.init, foil.actions)


def test_belief_state_matches_naive_choice_enumeration():
    for instance in random_instances()[:20]:
        lattice = instance.lattice
        for size in range(len(lattice.units) + 1):
            spec = lattice.spec(lattice.ids[:size])
            abstract = project(instance.base, spec)
            for foil in instance.foils:
                assert validate_plan_nd(abstract, foil) == _naive_valid(abstract, foil)


def test_successors_of_nd_action():
    act = action("flip", (), clause((), ("a",), nd=True), clause((), ("b",), nd=True))
    assert successors(frozenset(), act) == {frozenset(), fs("a"), fs("b"), fs("a", "b")}


def test_validity_is_monotone_in_abstraction():
    for instance in random_instances():
        lattice = instance.lattice
        validator = FoilValidator(instance.base)
        for foil in instance.foils:
            for size in range(len(lattice.units)):
                smaller = lattice.spec(lattice.ids[:size])
                larger = lattice.spec(lattice.ids[: size + 1])
                if validator.is_valid(smaller, foil):
                    assert validator.is_valid(larger, foil)


def test_belief_cap_raises_resource_error():
    flips = [action(f"flip{i}", (), clause((), (f"x{i}",), nd=True)) for i in range(6)]
    base = model(flips, goal=("x0",))
    abstract = project(base, [])
    # Ações concretas com nd=True só existem em modelos montados à mão.
    with pytest.raises(BeliefStateLimitError) as excinfo:
        validate_plan_nd(abstract, Foil(tuple(item.name for item in flips)), belief_cap=8)
    assert excinfo.value.limit == 8


def test_resolution_set_of_battery_units():
    inputs = mini_rover()
    lattice = inputs.lattice
    validator = FoilValidator(inputs.model)
    m_min = [project(inputs.model, lattice.spec(ids)) for ids in (["battery_25", "battery_75"], ["battery_50", "battery_75"])]

    assert resolution_set(m_min, inputs.foils, "battery_75", validator=validator) == frozenset(inputs.foils)
    with pytest.raises(UnitNotDroppedError):
        resolution_set(m_min, inputs.foils, "battery_25")
    assert resolution_set(m_min, inputs.foils, "battery_25", strict=False) == frozenset()


def test_resolution_set_matches_full_projection():
    inputs = mini_rover()
    lattice = inputs.lattice
    models = [project(inputs.model, lattice.top)]
    for unit_id in lattice.ids:
        lazy = resolution_set(models, inputs.foils, unit_id)
        full = frozenset(
            foil
            for foil in inputs.foils
            if not validate_plan_nd(project(inputs.model, lattice.top.without(unit_id)), foil)
        )
        assert lazy == full

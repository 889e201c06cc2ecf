# -*- coding: utf-8 -*-
"""Orquestra leitura de arquivos, aterramento, M_min e busca para CLI e API."""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Tuple

from services.errors import EnumerationLimitError, InvalidFoilError
from services.execution import Foil, FoilValidator
from services.explain import (
    ExplanationProblem,
    brute_force_oracle,
    greedy_within_bound,
    greedy_within_ln_bound,
    harmonic,
    ln_factor,
    run_method,
    verify_explanation,
)
from services.grounding import ground
from services.lattice import (
    LatticeSpec,
    consistent_models,
    generate_lattice_config,
    lattice_from_config,
    load_lattice_config,
    min_abstraction_set,
)
from services.model import PlanningModel
from services.pddl_parser import parse_domain, parse_problem
from services.render import render_explanation
from services.settings import Settings

logger = logging.getLogger(__name__)


@dataclass
class ExplainInputs:
    model: PlanningModel
    lattice: LatticeSpec
    foils: Tuple[Foil, ...]
    plan: Foil | None = None
    warnings: List[str] = field(default_factory=list)


def parse_foils(data: Any) -> Tuple[Foil | None, Tuple[Foil, ...]]:
    """Aceita uma lista de foils ou {"plan": [...], "foils": [...]}.

    Cada foil é uma lista de ações ou {"label": ..., "actions": [...]}.
    """
    plan: Foil | None = None
    raw = data
    if isinstance(data, Mapping):
        if data.get("plan"):
            plan = Foil.parse(data["plan"], label="π_R")
        raw = data.get("foils")
    if not isinstance(raw, list) or not raw:
        raise InvalidFoilError("Arquivo de foils precisa de pelo menos um foil (F não pode ser vazio).")
    foils: List[Foil] = []
    for index, item in enumerate(raw, start=1):
        label = f"F{index}"
        actions = item
        if isinstance(item, Mapping):
            label = str(item.get("label") or label)
            actions = item.get("actions")
        if isinstance(actions, str) or not isinstance(actions, list):
            raise InvalidFoilError(f"Foil {label} deve ser uma lista de ações.", foil=label)
        foils.append(Foil.parse(actions, label=label))
    return plan, tuple(foils)


def read_json(path: str | Path, *, what: str) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidFoilError(f"JSON inválido em {what} ({path}): {exc}") from exc


def build_inputs(
    domain_text: str,
    problem_text: str,
    foils_data: Any,
    *,
    lattice_config: Mapping[str, Any] | None,
    fraction: float,
    seed: int,
    settings: Settings,
) -> ExplainInputs:
    domain = parse_domain(domain_text)
    problem = parse_problem(problem_text, domain)
    model = ground(domain, problem, action_cap=settings.grounding_action_cap)
    if lattice_config is not None:
        lattice = lattice_from_config(model, lattice_config, default_granularity=settings.unit_granularity)
    else:
        lattice = generate_lattice_config(model, fraction, seed, granularity=settings.unit_granularity)
    plan, foils = parse_foils(foils_data)
    for foil in foils:
        foil.resolve(model)
    if plan is not None:
        plan.resolve(model)
    return ExplainInputs(model, lattice, foils, plan, [*domain.warnings, *problem.warnings])


def lattice_summary(lattice: LatticeSpec) -> Dict[str, Any]:
    return {
        "units": [
            {"id": unit.id, "cost": lattice.costs[unit.id], "fluents": len(unit.fluents)} for unit in lattice.units
        ],
        "total_cost": lattice.total_cost,
    }


def greedy_bound(problem: ExplanationProblem, greedy_cost: int, *, oracle_cap: int) -> Dict[str, Any] | None:
    """Compara o custo guloso com o ótimo do oráculo, quando o oráculo cabe no limite."""
    try:
        optimal = brute_force_oracle(problem, cap=oracle_cap).cost
    except EnumerationLimitError:
        return None
    k = problem.max_resolution_size()
    return {
        "optimal": optimal,
        "harmonic_bound": round(max(1.0, harmonic(k)) * optimal, 6),
        "within_bound": greedy_within_bound(greedy_cost, optimal, k),
        "ln_bound": round(ln_factor(k) * optimal, 6),
        "within_ln_bound": greedy_within_ln_bound(greedy_cost, optimal, k),
    }


def explain_report(inputs: ExplainInputs, method: str, settings: Settings) -> Dict[str, Any]:
    validator = FoilValidator(inputs.model, belief_cap=settings.belief_state_cap)
    problem = ExplanationProblem(
        inputs.lattice,
        inputs.foils,
        validator=validator,
        trust_union=settings.trust_union,
    )
    started = time.perf_counter()
    explanation = run_method(problem, method, oracle_cap=settings.oracle_unit_cap)
    elapsed = time.perf_counter() - started
    messages = render_explanation(explanation, inputs.model)
    bound = (
        greedy_bound(problem, explanation.cost, oracle_cap=settings.oracle_unit_cap)
        if explanation.method == "greedy"
        else None
    )
    union_gap = problem.union_gap(explanation.ids)
    if union_gap:
        logger.warning(
            "union_violation explanation=%s foils=%s", ",".join(explanation.ids), ",".join(f.name for f in union_gap)
        )
    return {
        "method": explanation.method,
        "model": inputs.model.summary(),
        "plan": list(inputs.plan.actions) if inputs.plan else None,
        "foils": {foil.name: list(foil.actions) for foil in problem.foils},
        "lattice": lattice_summary(inputs.lattice),
        "m_min": [list(ids) for ids in problem.m_min.id_sets],
        "k": problem.max_resolution_size(),
        "resolution_sets": {
            unit_id: sorted(foil.name for foil in problem.resolution(unit_id)) for unit_id in problem.candidates
        },
        "explanation": {
            "units": list(explanation.ids),
            "unit_costs": dict(explanation.unit_costs),
            "cost": explanation.cost,
            "size": explanation.size,
            "messages": [message.text for message in messages],
        },
        "valid": verify_explanation(problem, explanation),
        "greedy_bound": bound,
        "union_violations": problem.union_violations + (1 if union_gap else 0),
        "union_gap": sorted(foil.name for foil in union_gap),
        "expanded": explanation.expanded,
        "elapsed_s": round(elapsed, 6),
        "warnings": list(inputs.warnings),
    }


def lattice_report(inputs: ExplainInputs, settings: Settings) -> Dict[str, Any]:
    validator = FoilValidator(inputs.model, belief_cap=settings.belief_state_cap)
    report: Dict[str, Any] = {"lattice": lattice_summary(inputs.lattice)}
    if len(inputs.lattice.units) <= settings.lattice_enum_cap:
        specs = consistent_models(inputs.lattice, inputs.foils, cap=settings.lattice_enum_cap, validator=validator)
        report["consistent"] = [list(spec.ids) for spec in specs]
    else:
        report["consistent"] = None
    report["m_min"] = [list(ids) for ids in min_abstraction_set(inputs.lattice, inputs.foils, validator=validator).id_sets]
    return report


def read_inputs(
    domain: Path,
    problem: Path,
    foils: Path,
    *,
    lattice: Path | None,
    fraction: float,
    seed: int,
    settings: Settings,
) -> ExplainInputs:
    return build_inputs(
        domain.read_text(encoding="utf-8"),
        problem.read_text(encoding="utf-8"),
        read_json(foils, what="foils"),
        lattice_config=load_lattice_config(lattice) if lattice else None,
        fraction=fraction,
        seed=seed,
        settings=settings,
    )

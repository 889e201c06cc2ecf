# -*- coding: utf-8 -*-
"""Configuração lida do ambiente (e de um .env local, quando existir)."""
from __future__ import annotations

from dataclasses import dataclass

from dotenv import find_dotenv, load_dotenv

from startup_diagnostics import env_bool, env_choice, env_float, env_int

GRANULARITIES = ("predicate", "fluent")


@dataclass(frozen=True)
class Settings:
    grounding_action_cap: int = 500_000
    belief_state_cap: int = 100_000
    lattice_enum_cap: int = 16
    oracle_unit_cap: int = 12
    trust_union: bool = True
    unit_granularity: str = "predicate"
    lattice_fraction: float = 0.5
    bench_workers: int = 1


def load_settings(*, dotenv: bool = True) -> Settings:
    if dotenv:
        load_dotenv(find_dotenv(usecwd=True), override=False)
    return Settings(
        grounding_action_cap=env_int("GROUNDING_ACTION_CAP", 500_000, minimum=1),
        belief_state_cap=env_int("BELIEF_STATE_CAP", 100_000, minimum=1),
        lattice_enum_cap=env_int("LATTICE_ENUM_CAP", 16, minimum=0),
        oracle_unit_cap=env_int("ORACLE_UNIT_CAP", 12, minimum=0),
        trust_union=env_bool("TRUST_UNION", True),
        unit_granularity=env_choice("UNIT_GRANULARITY", "predicate", GRANULARITIES),
        lattice_fraction=env_float("LATTICE_FRACTION", 0.5, minimum=0.0, maximum=1.0, exclusive_minimum=True),
        bench_workers=env_int("BENCH_WORKERS", 1, minimum=1),
    )

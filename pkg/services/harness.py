# -*- coding: utf-8 -*-
"""Harness de benchmark: amostra foils, roda os métodos e exporta tabelas.

O tempo medido é só o da chamada de busca (parse, aterramento e M_min ficam de
fora). Linhas saem na ordem do manifesto, independentemente do paralelismo.
"""
from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Sequence

import numpy as np
import pandas as pd

from services.errors import ExplicadorError, InvalidFoilError, ManifestError, PoolExhaustedError
from services.execution import Foil, FoilValidator
from services.explain import (
    ExplanationProblem,
    greedy_within_bound,
    greedy_within_ln_bound,
    run_method,
    verify_explanation,
)
from services.grounding import ground
from services.lattice import LatticeSpec, lattice_from_config, load_lattice_config
from services.pddl_parser import parse_domain, parse_problem
from services.pipeline import parse_foils, read_json
from services.settings import Settings

logger = logging.getLogger(__name__)

DEFAULT_FOIL_SIZES = (1, 2, 4)
DEFAULT_METHODS = ("blind", "astar", "greedy")
TIMING_COLUMNS = ("wall_time",)
AVERAGE_LABEL = "__media__"


@dataclass(frozen=True)
class BenchmarkRow:
    domain: str
    problem: str
    seed: int
    n_units: int
    c_units: int
    n_foils: int
    method: str
    cost: float
    size: float
    k: int
    valid: bool
    bound_ok: bool
    ln_bound_ok: bool
    wall_time: float


def foil_pool_sample(
    lattice: LatticeSpec,
    pool: Sequence[Foil],
    size: int,
    seed: int,
    *,
    validator: FoilValidator | None = None,
) -> List[Foil]:
    """Amostra sem reposição; antes, confere que todo foil do pool é válido no
    modelo totalmente abstrato e inválido no modelo base."""
    checker = validator if validator is not None and validator.base is lattice.base else FoilValidator(lattice.base)
    for foil in pool:
        foil.resolve(lattice.base)
        if checker.is_valid(lattice.bottom, foil):
            raise InvalidFoilError(f"Foil {foil.name} vale no modelo base; não há o que explicar.", foil=foil.name)
        if not checker.is_valid(lattice.top, foil):
            raise InvalidFoilError(
                f"Foil {foil.name} não vale nem no modelo totalmente abstrato.", foil=foil.name
            )
    if size < 1:
        raise InvalidFoilError(f"Tamanho de amostra inválido: {size}.")
    if size > len(pool):
        raise PoolExhaustedError(f"Pool com {len(pool)} foils não comporta amostra de {size}.")
    rng = np.random.default_rng(seed)
    picked = sorted(int(index) for index in rng.choice(len(pool), size=size, replace=False))
    return [pool[index] for index in picked]


@dataclass
class SuiteEntry:
    domain: str
    problem: str
    domain_path: Path
    problem_path: Path
    pool_path: Path
    lattice: Dict[str, Any]


def load_manifest(path: str | Path) -> Dict[str, Any]:
    manifest_path = Path(path)
    try:
        data = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ManifestError(f"Manifesto com JSON inválido ({manifest_path}): {exc}") from exc
    if not isinstance(data, dict) or not data.get("problems"):
        raise ManifestError(f"Manifesto sem a lista \"problems\": {manifest_path}")
    root = manifest_path.parent
    entries: List[SuiteEntry] = []
    for item in data["problems"]:
        missing = [key for key in ("domain", "problem", "pool") if key not in item]
        if missing:
            raise ManifestError(f"Entrada do manifesto sem {', '.join(missing)}: {item}")
        lattice = item.get("lattice") or {"fraction": 0.5, "seed": 0}
        if isinstance(lattice, str):
            lattice = load_lattice_config(root / lattice)
        entries.append(
            SuiteEntry(
                domain=str(item.get("name") or Path(item["domain"]).parent.name or Path(item["domain"]).stem),
                problem=Path(item["problem"]).stem,
                domain_path=root / item["domain"],
                problem_path=root / item["problem"],
                pool_path=root / item["pool"],
                lattice=dict(lattice),
            )
        )
    return {
        "entries": entries,
        "seeds": [int(seed) for seed in data.get("seeds", [0])],
        "foil_sizes": [int(size) for size in data.get("foil_sizes", DEFAULT_FOIL_SIZES)],
        "methods": [str(method) for method in data.get("methods", DEFAULT_METHODS)],
    }


def run_problem(
    entry: SuiteEntry,
    *,
    seeds: Sequence[int],
    foil_sizes: Sequence[int],
    methods: Sequence[str],
    settings: Settings,
) -> List[BenchmarkRow]:
    domain = parse_domain(entry.domain_path.read_text(encoding="utf-8"))
    problem = parse_problem(entry.problem_path.read_text(encoding="utf-8"), domain)
    model = ground(domain, problem, action_cap=settings.grounding_action_cap)
    lattice = lattice_from_config(model, entry.lattice, default_granularity=settings.unit_granularity)
    _, pool = parse_foils(read_json(entry.pool_path, what="pool de foils"))
    validator = FoilValidator(model, belief_cap=settings.belief_state_cap)
    rows: List[BenchmarkRow] = []
    for seed in seeds:
        for size in foil_sizes:
            if size > len(pool):
                logger.warning("bench_size_skipped problem=%s size=%d pool=%d", entry.problem, size, len(pool))
                continue
            foils = foil_pool_sample(lattice, pool, size, seed, validator=validator)
            problem = ExplanationProblem(lattice, foils, validator=validator, trust_union=settings.trust_union)
            k = problem.max_resolution_size()
            results = []
            for method in methods:
                started = time.perf_counter()
                explanation = run_method(problem, method, oracle_cap=settings.oracle_unit_cap)
                results.append((explanation, time.perf_counter() - started))
            costs = {explanation.method: explanation.cost for explanation, _ in results}
            bound_ok = ln_bound_ok = True
            if "greedy" in costs and "blind" in costs:
                bound_ok = costs["blind"] <= costs["greedy"] and greedy_within_bound(costs["greedy"], costs["blind"], k)
                ln_bound_ok = greedy_within_ln_bound(costs["greedy"], costs["blind"], k)
                if not bound_ok:
                    logger.warning(
                        "bench_bound_check_failed problem=%s seed=%d size=%d blind=%d greedy=%d k=%d",
                        entry.problem,
                        seed,
                        size,
                        costs["blind"],
                        costs["greedy"],
                        k,
                    )
            for explanation, elapsed in results:
                rows.append(
                    BenchmarkRow(
                        domain=entry.domain,
                        problem=entry.problem,
                        seed=seed,
                        n_units=len(lattice.units),
                        c_units=lattice.total_cost,
                        n_foils=len(foils),
                        method=explanation.method,
                        cost=float(explanation.cost),
                        size=float(explanation.size),
                        k=k,
                        valid=verify_explanation(problem, explanation),
                        bound_ok=bound_ok if explanation.method == "greedy" else True,
                        ln_bound_ok=ln_bound_ok if explanation.method == "greedy" else True,
                        wall_time=round(elapsed, 6),
                    )
                )
    return rows


def run_suite(
    manifest: Mapping[str, Any],
    settings: Settings,
    *,
    seeds: Sequence[int] | None = None,
    foil_sizes: Sequence[int] | None = None,
    methods: Sequence[str] | None = None,
    workers: int | None = None,
) -> List[BenchmarkRow]:
    started = time.perf_counter()
    entries: List[SuiteEntry] = list(manifest["entries"])
    options = {
        "seeds": list(seeds or manifest["seeds"]),
        "foil_sizes": list(foil_sizes or manifest["foil_sizes"]),
        "methods": list(methods or manifest["methods"]),
        "settings": settings,
    }

    def job(entry: SuiteEntry) -> List[BenchmarkRow]:
        try:
            return run_problem(entry, **options)
        except (ExplicadorError, OSError, ValueError) as exc:
            logger.error(
                "bench_problem_failed domain=%s problem=%s error_type=%s error=%s",
                entry.domain,
                entry.problem,
                type(exc).__name__,
                exc,
            )
            return []

    with ThreadPoolExecutor(max_workers=max(1, workers or settings.bench_workers)) as pool:
        results = list(pool.map(job, entries))
    rows = [row for chunk in results for row in chunk]
    logger.info(
        "bench_complete problems=%d rows=%d elapsed_s=%.2f", len(entries), len(rows), time.perf_counter() - started
    )
    return rows


def rows_to_frame(rows: Iterable[BenchmarkRow]) -> pd.DataFrame:
    columns = [item.name for item in fields(BenchmarkRow)]
    return pd.DataFrame([asdict(row) for row in rows], columns=columns)


def averages(frame: pd.DataFrame) -> pd.DataFrame:
    """Médias por (domínio, |F|, método), no formato das linhas comuns."""
    if frame.empty:
        return frame.copy()
    grouped = (
        frame.groupby(["domain", "n_foils", "method"], sort=True)
        .agg(
            n_units=("n_units", "mean"),
            c_units=("c_units", "mean"),
            cost=("cost", "mean"),
            size=("size", "mean"),
            k=("k", "max"),
            valid=("valid", "all"),
            bound_ok=("bound_ok", "all"),
            ln_bound_ok=("ln_bound_ok", "all"),
            wall_time=("wall_time", "mean"),
        )
        .reset_index()
    )
    grouped["problem"] = AVERAGE_LABEL
    grouped["seed"] = -1
    grouped["n_units"] = grouped["n_units"].round().astype(int)
    grouped["c_units"] = grouped["c_units"].round().astype(int)
    return grouped[list(frame.columns)]


def report_frame(rows: Iterable[BenchmarkRow]) -> pd.DataFrame:
    frame = rows_to_frame(rows)
    return pd.concat([frame, averages(frame)], ignore_index=True)


def write_rows_csv(rows: Iterable[BenchmarkRow], path: str | Path, *, with_averages: bool = True) -> pd.DataFrame:
    frame = report_frame(rows) if with_averages else rows_to_frame(rows)
    frame.to_csv(path, index=False)
    return frame


def read_rows_csv(path: str | Path) -> List[BenchmarkRow]:
    frame = pd.read_csv(path)
    frame = frame[frame["problem"] != AVERAGE_LABEL]
    rows: List[BenchmarkRow] = []
    for record in frame.to_dict(orient="records"):
        rows.append(
            BenchmarkRow(
                domain=str(record["domain"]),
                problem=str(record["problem"]),
                seed=int(record["seed"]),
                n_units=int(record["n_units"]),
                c_units=int(record["c_units"]),
                n_foils=int(record["n_foils"]),
                method=str(record["method"]),
                cost=float(record["cost"]),
                size=float(record["size"]),
                k=int(record["k"]),
                valid=bool(record["valid"]),
                bound_ok=bool(record["bound_ok"]),
                ln_bound_ok=bool(record["ln_bound_ok"]),
                wall_time=float(record["wall_time"]),
            )
        )
    return rows


def write_rows_xlsx(rows: Iterable[BenchmarkRow], path: str | Path) -> None:
    frame = rows_to_frame(rows)
    with pd.ExcelWriter(path, engine="xlsxwriter") as writer:
        frame.to_excel(writer, sheet_name="linhas", index=False)
        averages(frame).to_excel(writer, sheet_name="medias", index=False)


def rows_digest(rows: Iterable[BenchmarkRow]) -> str:
    """SHA-256 das linhas sem as colunas de tempo."""
    frame = rows_to_frame(rows).drop(columns=list(TIMING_COLUMNS))
    return hashlib.sha256(frame.to_csv(index=False).encode("utf-8")).hexdigest()

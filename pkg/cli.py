# -*- coding: utf-8 -*-
"""Linha de comando do explicador: `explain`, `lattice` e `bench`.

Códigos de saída: 0 ok, 1 entrada inválida, 2 foils sem explicação, 3 limite de
recurso atingido.
"""
from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable, Dict, Sequence

import click

from services.errors import EXIT_INPUT, ExplicadorError
from services.explain import METHOD_ALIASES, METHODS
from services.harness import load_manifest, report_frame, rows_digest, run_suite, write_rows_xlsx
from services.pipeline import explain_report, lattice_report, read_inputs
from services.render import format_csv, format_json, format_text
from services.settings import load_settings
from startup_diagnostics import StartupConfigError, configure_startup_logging

logger = logging.getLogger(__name__)

_FILE = click.Path(exists=True, dir_okay=False, path_type=Path)
FORMATTERS: Dict[str, Callable[[Dict[str, Any]], str]] = {"text": format_text, "json": format_json, "csv": format_csv}


class ExplicadorGroup(click.Group):
    """Erros de uso saem com código 1 (o 2 é reservado para foils inviáveis)."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            result = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.ClickException as exc:
            exc.show()
            sys.exit(EXIT_INPUT)
        except click.Abort:
            click.echo("Abortado.", err=True)
            sys.exit(EXIT_INPUT)
        sys.exit(result if isinstance(result, int) else 0)


def _fail(exc: Exception) -> int:
    if isinstance(exc, ExplicadorError):
        click.echo(f"erro [{exc.category}] {type(exc).__name__}: {exc}", err=True)
        return exc.exit_code
    click.echo(f"erro [configuration] {type(exc).__name__}: {exc}", err=True)
    return EXIT_INPUT


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        out.write_text(text, encoding="utf-8")
        click.echo(f"relatório gravado em {out}", err=True)


def _guarded(action: Callable[[], int]) -> int:
    try:
        return action()
    except (ExplicadorError, StartupConfigError) as exc:
        return _fail(exc)
    except UnicodeDecodeError as exc:
        click.echo(
            f"erro [input] UnicodeDecodeError: arquivo de entrada não é UTF-8 válido ({exc.reason}, byte {exc.start})",
            err=True,
        )
        return EXIT_INPUT


def _input_options(command: Callable) -> Callable:
    options = [
        click.option("--domain", "domain", type=_FILE, required=True, help="Arquivo de domínio PDDL."),
        click.option("--problem", "problem", type=_FILE, required=True, help="Arquivo de problema PDDL."),
        click.option("--foils", "foils", type=_FILE, required=True, help="JSON com os foils (e opcionalmente o plano)."),
        click.option("--lattice", "lattice", type=_FILE, default=None, help="JSON com as unidades do reticulado."),
        click.option("--fraction", type=float, default=None, help="Fração de predicados sorteados (padrão LATTICE_FRACTION)."),
        click.option("--seed", type=int, default=0, show_default=True, help="Semente do sorteio de predicados."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


@click.group(cls=ExplicadorGroup)
@click.option("--log-level", default=None, help="Sobrescreve LOG_LEVEL.")
def cli(log_level: str | None) -> None:
    """Explicações contrastivas por concretização de modelos abstratos."""
    if log_level:
        os.environ["LOG_LEVEL"] = log_level
    configure_startup_logging()


@cli.command("explain")
@_input_options
@click.option(
    "--method",
    type=click.Choice([*METHODS, *METHOD_ALIASES]),
    default="blind",
    show_default=True,
)
@click.option("--format", "output_format", type=click.Choice(sorted(FORMATTERS)), default="text", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
def explain_command(domain, problem, foils, lattice, fraction, seed, method, output_format, out) -> int:
    """Calcula a explicação de menor custo para os foils."""

    def action() -> int:
        settings = load_settings()
        inputs = read_inputs(
            domain,
            problem,
            foils,
            lattice=lattice,
            fraction=settings.lattice_fraction if fraction is None else fraction,
            seed=seed,
            settings=settings,
        )
        report = explain_report(inputs, method, settings)
        _emit(FORMATTERS[output_format](report), out)
        return 0

    return _guarded(action)


@cli.command("lattice")
@_input_options
@click.option("--format", "output_format", type=click.Choice(["text", "json"]), default="text", show_default=True)
def lattice_command(domain, problem, foils, lattice, fraction, seed, output_format) -> int:
    """Lista unidades, custos, modelos consistentes e M_min."""

    def action() -> int:
        settings = load_settings()
        inputs = read_inputs(
            domain,
            problem,
            foils,
            lattice=lattice,
            fraction=settings.lattice_fraction if fraction is None else fraction,
            seed=seed,
            settings=settings,
        )
        report = lattice_report(inputs, settings)
        if output_format == "json":
            click.echo(format_json(report), nl=False)
            return 0
        summary = report["lattice"]
        for unit in summary["units"]:
            click.echo(f"{unit['id']}: custo {unit['cost']} ({unit['fluents']} fluentes)")
        click.echo(f"C_ℙ = {summary['total_cost']}")
        if report["consistent"] is not None:
            click.echo(f"modelos consistentes ({len(report['consistent'])}):")
            for ids in report["consistent"]:
                click.echo("  {" + ", ".join(ids) + "}")
        click.echo("M_min: " + "; ".join("{" + ", ".join(ids) + "}" for ids in report["m_min"]))
        return 0

    return _guarded(action)


def _int_list(value: str | None) -> Sequence[int] | None:
    if not value:
        return None
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError as exc:
        raise click.BadParameter(f"lista de inteiros inválida: {value!r}") from exc


@cli.command("bench")
@click.option("--manifest", type=_FILE, required=True, help="JSON da suíte (problemas, pools, sementes).")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True, help="CSV de saída.")
@click.option("--seeds", default=None, help="Sementes separadas por vírgula (sobrescreve o manifesto).")
@click.option("--foil-sizes", default=None, help="Tamanhos de |F| separados por vírgula.")
@click.option("--methods", default=None, help="Métodos separados por vírgula.")
@click.option("--workers", type=int, default=None, help="Threads para rodar problemas em paralelo.")
@click.option("--xlsx", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Exporta também em XLSX.")
def bench_command(manifest, out, seeds, foil_sizes, methods, workers, xlsx) -> int:
    """Roda a suíte e grava linhas + médias por (domínio, |F|, método)."""
    seed_list = _int_list(seeds)
    size_list = _int_list(foil_sizes)
    method_list = [part.strip() for part in methods.split(",")] if methods else None

    def action() -> int:
        settings = load_settings()
        suite = load_manifest(manifest)
        rows = run_suite(suite, settings, seeds=seed_list, foil_sizes=size_list, methods=method_list, workers=workers)
        frame = report_frame(rows)
        frame.to_csv(out, index=False)
        if xlsx is not None:
            write_rows_xlsx(rows, xlsx)
        summary: Dict[str, Any] = {"rows": len(rows), "digest": rows_digest(rows), "out": str(out)}
        click.echo(json.dumps(summary, ensure_ascii=False))
        return 0

    return _guarded(action)


if __name__ == "__main__":
    cli()

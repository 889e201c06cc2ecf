# -*- coding: utf-8 -*-
"""Conversão de explicações em mensagens de atualização de modelo."""
from __future__ import annotations

import json
from typing import Any, Dict, List

import pandas as pd

from services.abstraction import model_updates
from services.explain import Explanation
from services.model import ModelUpdateMessage, PlanningModel

__all__ = ["ModelUpdateMessage", "render_explanation", "format_text", "format_json", "format_csv"]


def render_explanation(explanation: Explanation, base: PlanningModel) -> List[ModelUpdateMessage]:
    """Uma mensagem por atualização única; total = custo da explicação."""
    messages: List[ModelUpdateMessage] = []
    for unit in sorted(explanation.units, key=lambda unit: unit.id):
        messages.extend(model_updates(base, unit))
    return sorted(messages, key=lambda message: message.sort_key)


def format_text(report: Dict[str, Any]) -> str:
    explanation = report["explanation"]
    lines = [
        f"método: {report['method']}",
        f"explicação: {{{', '.join(explanation['units']) or '∅'}}}",
        f"custo C_E = {explanation['cost']} (C_ℙ = {report['lattice']['total_cost']})",
        f"M_min ({len(report['m_min'])}): " + "; ".join("{" + ", ".join(ids) + "}" for ids in report["m_min"]),
        f"k = {report['k']}",
    ]
    if report.get("union_violations"):
        lines.append(f"violações de união observadas: {report['union_violations']}")
    lines.append("mensagens:")
    lines.extend(f"  {text}" for text in explanation["messages"])
    return "\n".join(lines) + "\n"


def format_json(report: Dict[str, Any]) -> str:
    return json.dumps(report, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def format_csv(report: Dict[str, Any]) -> str:
    """Uma linha no formato do benchmark, com as unidades separadas por `;`."""
    explanation = report["explanation"]
    row = {
        "method": report["method"],
        "units": ";".join(explanation["units"]),
        "n_units": len(report["lattice"]["units"]),
        "c_units": report["lattice"]["total_cost"],
        "n_foils": len(report["foils"]),
        "cost": explanation["cost"],
        "size": explanation["size"],
        "k": report["k"],
        "valid": report["valid"],
        "wall_time": report["elapsed_s"],
    }
    return pd.DataFrame([row]).to_csv(index=False)

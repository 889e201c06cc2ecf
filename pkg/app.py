# -*- coding: utf-8 -*-
"""
Explicador de Abstrações (Flask)
API JSON para explicações contrastivas por concretização de modelos abstratos.
"""

import logging
import os
from time import perf_counter
from typing import Any, Dict, Tuple

from flask import Flask, jsonify, request

from services.errors import ExplicadorError, InputError, error_body
from services.explain import METHOD_ALIASES, METHODS
from services.pipeline import build_inputs, explain_report
from services.settings import Settings, load_settings
from startup_diagnostics import build_error_payload, env_int

logger = logging.getLogger(__name__)

SERVICE_NAME = "explicador-abstracoes"


def _env(name: str, default: str = "") -> str:
    v = os.getenv(name)
    return v.strip() if isinstance(v, str) and v.strip() else default


def _error_payload(e: Exception, public_msg: str):
    return build_error_payload(
        e,
        public_message=public_msg,
        phase="request",
        include_trace=False,
    )


def _parse_explain_request(body: Any, settings: Settings) -> Dict[str, Any]:
    if not isinstance(body, dict):
        raise InputError("Corpo da requisição deve ser um objeto JSON.")
    for key in ("domain", "problem"):
        if not isinstance(body.get(key), str) or not body[key].strip():
            raise InputError(f"Campo {key!r} é obrigatório (texto PDDL).")
    if "foils" not in body:
        raise InputError("Campo 'foils' é obrigatório.")
    lattice = body.get("lattice")
    if lattice is not None and not isinstance(lattice, dict):
        raise InputError("Campo 'lattice' deve ser um objeto ou null.")
    method = str(body.get("method") or "blind").strip().lower()
    if method not in METHODS and method not in METHOD_ALIASES:
        raise InputError(f"Método desconhecido: {method!r}; use um de {', '.join(METHODS)}.")
    try:
        fraction = float(body["fraction"]) if body.get("fraction") is not None else None
        seed = int(body.get("seed", 0))
    except (TypeError, ValueError) as exc:
        raise InputError("Campos 'fraction' e 'seed' devem ser numéricos.") from exc
    foils = body["foils"]
    if body.get("plan") and isinstance(foils, list):
        foils = {"plan": body["plan"], "foils": foils}
    return {
        "domain": body["domain"],
        "problem": body["problem"],
        "foils": foils,
        "lattice": lattice,
        "method": method,
        "fraction": settings.lattice_fraction if fraction is None else fraction,
        "seed": seed,
    }


def _settings_view(settings: Settings) -> Dict[str, Any]:
    return {
        "grounding_action_cap": settings.grounding_action_cap,
        "belief_state_cap": settings.belief_state_cap,
        "lattice_enum_cap": settings.lattice_enum_cap,
        "oracle_unit_cap": settings.oracle_unit_cap,
        "trust_union": settings.trust_union,
        "unit_granularity": settings.unit_granularity,
        "lattice_fraction": settings.lattice_fraction,
    }


# ============================================================
# APP FACTORY
# ============================================================
def create_app(settings: Settings | None = None) -> Flask:
    app = Flask(__name__)
    app.config["MAX_CONTENT_LENGTH"] = env_int("MAX_REQUEST_MB", 8, minimum=1) * 1024 * 1024
    app.config["SETTINGS"] = settings or load_settings()

    def _failure(exc: ExplicadorError) -> Tuple[Any, int]:
        logger.warning(
            "api_explain_failed error_type=%s category=%s error=%s", type(exc).__name__, exc.category, exc
        )
        return jsonify({"ok": False, "error": error_body(exc)}), exc.http_status

    @app.get("/health")
    def health():
        return jsonify({"ok": True, "service": SERVICE_NAME})

    @app.get("/api/methods")
    def api_methods():
        current: Settings = app.config["SETTINGS"]
        return jsonify(
            {
                "ok": True,
                "data": {
                    "methods": list(METHODS),
                    "aliases": dict(METHOD_ALIASES),
                    "settings": _settings_view(current),
                },
            }
        )

    @app.post("/api/explain")
    def api_explain():
        started = perf_counter()
        current: Settings = app.config["SETTINGS"]
        try:
            params = _parse_explain_request(request.get_json(silent=True), current)
            inputs = build_inputs(
                params["domain"],
                params["problem"],
                params["foils"],
                lattice_config=params["lattice"],
                fraction=params["fraction"],
                seed=params["seed"],
                settings=current,
            )
            report = explain_report(inputs, params["method"], current)
        except ExplicadorError as exc:
            return _failure(exc)
        except Exception as e:
            logger.exception("api_explain_error route=/api/explain")
            return jsonify(_error_payload(e, "Falha ao calcular a explicação.")), 500
        elapsed = perf_counter() - started
        logger.info(
            "api_explain done method=%s cost=%s units=%d elapsed=%.2fs",
            report["method"],
            report["explanation"]["cost"],
            len(report["explanation"]["units"]),
            elapsed,
        )
        meta = {"service": SERVICE_NAME, "elapsed_s": round(elapsed, 6), "settings": _settings_view(current)}
        return jsonify({"ok": True, "data": report, "meta": meta})

    return app


if __name__ == "__main__":
    port = int(_env("PORT", "8000"))
    create_app().run(host="0.0.0.0", port=port, debug=True)

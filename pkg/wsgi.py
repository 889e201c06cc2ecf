# -*- coding: utf-8 -*-
"""Entrypoint WSGI do explicador.

Se ``create_app`` falhar (tipicamente variável de ambiente inválida), o
processo continua de pé e responde 503 em qualquer rota com o diagnóstico no
mesmo formato de erro da API, para que o motivo apareça em ``/health`` sem
precisar abrir os logs do gunicorn.
"""
from __future__ import annotations

import json
from typing import Any, Callable, Dict

from startup_diagnostics import (
    StartupConfigError,
    build_error_payload,
    configure_startup_logging,
    env_bool,
    log_startup_failure,
)

configure_startup_logging()

STARTUP_PUBLIC_MESSAGE = "Falha ao inicializar o explicador."


def _details_enabled() -> bool:
    try:
        return env_bool("STARTUP_ERROR_DETAILS", True)
    except StartupConfigError:
        return True


def _startup_error_body(payload: Dict[str, Any]) -> Dict[str, Any]:
    error: Dict[str, Any] = {
        "code": payload.get("error_type", "UnknownError"),
        "category": payload.get("error_category", "runtime"),
        "message": payload.get("error", STARTUP_PUBLIC_MESSAGE),
    }
    if _details_enabled():
        for key in ("details", "variable", "trace"):
            if payload.get(key):
                error[key] = payload[key]
    else:
        error["details"] = "Detalhes ocultos (STARTUP_ERROR_DETAILS=false)."
    return {
        "ok": False,
        "phase": payload.get("phase", "application_startup"),
        "error_type": error["code"],
        "error": error,
    }


def _startup_error_wsgi_app(payload: Dict[str, Any]) -> Callable:
    body = json.dumps(_startup_error_body(payload), ensure_ascii=False, indent=2, sort_keys=True).encode("utf-8")
    headers = [
        ("Content-Type", "application/json; charset=utf-8"),
        ("Content-Length", str(len(body))),
        ("Cache-Control", "no-store"),
        ("Retry-After", "30"),
    ]

    def application(environ, start_response):
        start_response("503 Service Unavailable", headers)
        return [body]

    return application


try:
    from app import create_app

    application = create_app()
except Exception as exc:
    log_startup_failure(exc)
    application = _startup_error_wsgi_app(
        build_error_payload(exc, public_message=STARTUP_PUBLIC_MESSAGE, phase="application_startup", include_trace=True)
    )

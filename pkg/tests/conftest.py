import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

CONFIG_VARS = (
    "GROUNDING_ACTION_CAP",
    "BELIEF_STATE_CAP",
    "LATTICE_ENUM_CAP",
    "ORACLE_UNIT_CAP",
    "TRUST_UNION",
    "UNIT_GRANULARITY",
    "LATTICE_FRACTION",
    "BENCH_WORKERS",
    "MAX_REQUEST_MB",
)


@pytest.fixture(autouse=True)
def clean_config_env(monkeypatch, tmp_path):
    """Cada teste parte dos padrões, sem .env nem variáveis herdadas do shell."""
    monkeypatch.chdir(tmp_path)
    for name in CONFIG_VARS:
        monkeypatch.delenv(name, raising=False)

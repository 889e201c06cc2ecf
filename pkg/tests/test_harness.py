import json

import pandas as pd
import pytest

from services.errors import InvalidFoilError, ManifestError, PoolExhaustedError
from services.execution import Foil
from services.harness import (
    AVERAGE_LABEL,
    BenchmarkRow,
    foil_pool_sample,
    load_manifest,
    read_rows_csv,
    report_frame,
    rows_digest,
    run_suite,
    write_rows_csv,
    write_rows_xlsx,
)
from services.pipeline import parse_foils, read_json
from services.settings import Settings
from tests.factories import BENCHMARKS, mini_rover


def mini_pool():
    _, pool = parse_foils(read_json(BENCHMARKS / "mini_rover" / "pool.json", what="pool"))
    return pool


def mini_manifest(tmp_path, **extra):
    data = {
        "problems": [
            {
                "name": "mini_rover",
                "domain": str(BENCHMARKS / "mini_rover" / "domain.pddl"),
                "problem": str(BENCHMARKS / "mini_rover" / "problem.pddl"),
                "pool": str(BENCHMARKS / "mini_rover" / "pool.json"),
                "lattice": str(BENCHMARKS / "mini_rover" / "lattice.json"),
            }
        ],
        "seeds": [0, 1],
        "foil_sizes": [1, 2],
        "methods": ["blind", "greedy"],
        **extra,
    }
    path = tmp_path / "suite.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_foil_pool_sample_is_deterministic():
    inputs = mini_rover()
    pool = mini_pool()
    first = foil_pool_sample(inputs.lattice, pool, 2, 11)
    second = foil_pool_sample(inputs.lattice, pool, 2, 11)
    assert first == second
    assert len(set(first)) == 2
    assert all(foil in pool for foil in first)
    assert foil_pool_sample(inputs.lattice, pool, 4, 3) == list(pool)


def test_foil_pool_sample_errors():
    inputs = mini_rover()
    pool = mini_pool()
    with pytest.raises(PoolExhaustedError):
        foil_pool_sample(inputs.lattice, pool, 5, 0)
    with pytest.raises(InvalidFoilError) as excinfo:
        foil_pool_sample(inputs.lattice, [*pool, inputs.plan], 1, 0)
    assert excinfo.value.foil == "π_R"
    with pytest.raises(InvalidFoilError):
        foil_pool_sample(inputs.lattice, [Foil(("drop_store0",), "nunca")], 1, 0)


def test_run_suite_rows_and_digest(tmp_path):
    manifest = load_manifest(mini_manifest(tmp_path))
    rows = run_suite(manifest, Settings())

    assert len(rows) == 2 * 2 * 2
    assert {row.method for row in rows} == {"blind", "greedy"}
    assert all(row.valid and row.bound_ok for row in rows)
    assert all(row.ln_bound_ok for row in rows if row.method != "greedy")
    assert all(row.c_units == 14 and row.n_units == 4 for row in rows)
    blind = {(row.seed, row.n_foils): row.cost for row in rows if row.method == "blind"}
    greedy = {(row.seed, row.n_foils): row.cost for row in rows if row.method == "greedy"}
    assert all(blind[key] <= greedy[key] for key in blind)

    again = run_suite(manifest, Settings(), workers=2)
    assert rows_digest(again) == rows_digest(rows)


def test_run_suite_skips_sizes_larger_than_pool(tmp_path):
    manifest = load_manifest(mini_manifest(tmp_path, foil_sizes=[8]))
    assert run_suite(manifest, Settings()) == []


def test_failing_problem_is_logged_and_skipped(tmp_path, caplog):
    path = mini_manifest(tmp_path)
    data = json.loads(path.read_text(encoding="utf-8"))
    data["problems"].append({**data["problems"][0], "name": "quebrado", "pool": str(tmp_path / "nada.json")})
    (tmp_path / "nada.json").write_text('{"foils": []}', encoding="utf-8")
    path.write_text(json.dumps(data), encoding="utf-8")

    rows = run_suite(load_manifest(path), Settings(), seeds=[0], foil_sizes=[1], methods=["greedy"])
    assert {row.domain for row in rows} == {"mini_rover"}
    assert "bench_problem_failed" in caplog.text


def test_csv_keeps_rows_and_appends_averages(tmp_path):
    manifest = load_manifest(mini_manifest(tmp_path))
    rows = run_suite(manifest, Settings(), seeds=[0, 1], foil_sizes=[1], methods=["blind"])
    out = tmp_path / "bench.csv"
    frame = write_rows_csv(rows, out)

    averages = frame[frame["problem"] == AVERAGE_LABEL]
    assert len(averages) == 1
    assert list(frame.columns[-3:]) == ["bound_ok", "ln_bound_ok", "wall_time"]
    assert averages.iloc[0]["seed"] == -1
    assert rows_digest(read_rows_csv(out)) == rows_digest(rows)


def test_xlsx_export_has_rows_and_averages(tmp_path):
    row = BenchmarkRow("d", "p", 0, 3, 9, 1, "blind", 3.0, 1.0, 1, True, True, True, 0.01)
    out = tmp_path / "bench.xlsx"
    write_rows_xlsx([row, row], out)
    sheets = pd.read_excel(out, sheet_name=None, engine="openpyxl")
    assert set(sheets) == {"linhas", "medias"}
    assert len(sheets["linhas"]) == 2
    assert sheets["medias"].iloc[0]["problem"] == AVERAGE_LABEL


def test_digest_ignores_timing():
    row = BenchmarkRow("d", "p", 0, 3, 9, 1, "blind", 3.0, 1.0, 1, True, True, True, 0.01)
    slower = BenchmarkRow("d", "p", 0, 3, 9, 1, "blind", 3.0, 1.0, 1, True, True, True, 9.5)
    assert rows_digest([row]) == rows_digest([slower])
    assert len(report_frame([row])) == 2


@pytest.mark.parametrize(
    "content",
    [
        "{nao json",
        json.dumps({"problems": []}),
        json.dumps({"problems": [{"domain": "d.pddl", "problem": "p.pddl"}]}),
    ],
)
def test_bad_manifest(tmp_path, content):
    path = tmp_path / "suite.json"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(ManifestError):
        load_manifest(path)


def test_versioned_suite_manifest_loads():
    manifest = load_manifest(BENCHMARKS / "suite.json")
    assert [entry.domain for entry in manifest["entries"]] == ["mini_rover", "rover"]
    assert manifest["foil_sizes"] == [1, 2, 4]
    assert "units" in manifest["entries"][1].lattice

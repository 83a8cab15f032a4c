import json
import subprocess
import sys

import pytest

from levikit.cli import main
from levikit.report import CSV_COLUMNS, Report, emit_report, verify_report
from levikit.scenarios import REGISTRY, ConfigError, ScenarioConfig

# the cheapest catalog entry; runs in about a second
FAST = "reinhardt-completion"


def write_config(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


@pytest.fixture(scope="module")
def fast_report(tmp_path_factory):
    out = tmp_path_factory.mktemp("rep") / "out"
    assert main(["run", "--scenario", FAST, "--out", str(out)]) == 0
    return out


# ---------------------------------------------------------------------------
# list / run / verify


def test_list(capsys):
    assert main(["list"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [ln.split()[0] for ln in lines] == sorted(REGISTRY)
    assert len(lines) == 7


def test_run_writes_report(fast_report):
    names = {p.name for p in fast_report.iterdir()}
    assert {"report.csv", "report.json", "masks"} <= names
    doc = json.loads((fast_report / "report.json").read_text())
    assert doc["passed"] and doc["provenance"]["seed"] == 0
    assert doc["provenance"]["config"]["scenario"] == FAST
    header = (fast_report / "report.csv").read_text().splitlines()[0]
    assert header == ",".join(CSV_COLUMNS)


def test_verify_ok(fast_report, capsys):
    assert main(["verify", str(fast_report)]) == 0
    assert "files intact" in capsys.readouterr().out


def test_verify_detects_tampering(fast_report, tmp_path):
    import shutil
    copy = tmp_path / "copy"
    shutil.copytree(fast_report, copy)
    mask = sorted((copy / "masks").iterdir())[0]
    mask.write_text(mask.read_text().replace("1", "0", 1))
    code, msgs = verify_report(copy)
    assert code == 1 and any("hash mismatch" in m for m in msgs)


def test_verify_missing_dir(tmp_path):
    assert main(["verify", str(tmp_path / "nothing")]) == 1


def test_run_unknown_scenario(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--scenario", "no-such", "--out", str(out)]) == 1
    assert not out.exists()
    assert "unknown scenario" in capsys.readouterr().err


def test_run_verdict_failure_exit_code(tmp_path):
    # inner test points up to modulus 1.05 lie outside the bidisc, so accuracy fails
    cfg = write_config(tmp_path, {"params": {"rin": 1.05, "certify": False,
                                             "n_in": 100, "n_out": 20}})
    out = tmp_path / "out"
    assert main(["run", "--scenario", "torus-hull", "--config", cfg, "--out", str(out)]) == 2
    code, msgs = verify_report(out)
    assert code == 2 and any("verdict failed" in m for m in msgs)


def test_run_seed_override(tmp_path):
    cfg = write_config(tmp_path, {"scenario": FAST, "seed": 3})
    out = tmp_path / "out"
    assert main(["run", "--scenario", FAST, "--config", cfg, "--out", str(out),
                 "--seed", "9"]) == 0
    assert json.loads((out / "report.json").read_text())["provenance"]["seed"] == 9


@pytest.mark.parametrize("doc", [
    {"params": {"nonsense": 1}},
    {"params": {"h": 0.5}},
    {"seed": -1},
    {"scenario": "torus-hull"},
    {"colour": "blue"},
    [1, 2],
])
def test_run_config_errors(tmp_path, doc):
    cfg = write_config(tmp_path, doc)
    assert main(["run", "--scenario", FAST, "--config", cfg, "--out",
                 str(tmp_path / "o")]) == 1


def test_run_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["run", "--scenario", FAST, "--config", str(p), "--out", str(tmp_path)]) == 1


def test_usage_errors():
    with pytest.raises(SystemExit) as e:
        main(["run", "--scenario", FAST])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main([])
    assert e.value.code == 1


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "levikit.cli", "list"], capture_output=True,
                       text=True, check=False)
    assert r.returncode == 0 and FAST in r.stdout


# ---------------------------------------------------------------------------
# configuration and report objects


def test_config_seed_bounds():
    ScenarioConfig(FAST, seed=2 ** 64 - 1)
    with pytest.raises(ConfigError):
        ScenarioConfig(FAST, seed=2 ** 64)
    with pytest.raises(ConfigError):
        ScenarioConfig(FAST, seed=True)


def test_config_scheme_validation():
    with pytest.raises(ConfigError):
        ScenarioConfig("sphere-cap", scheme={"relaxation": 3.0})


def test_empty_report_header_only(tmp_path):
    written = emit_report(Report("empty"), tmp_path, formats=["csv"])
    assert written == ["report.csv"]
    assert (tmp_path / "report.csv").read_text() == ",".join(CSV_COLUMNS) + "\n"
    assert [p.name for p in tmp_path.iterdir()] == ["report.csv"]


def test_emit_report_idempotent(tmp_path):
    r = Report("x", provenance={"seed": 4})
    r.scalar("a", 0.1)
    r.check("b", True, 1.0, 2.0, budget=5)
    emit_report(r, tmp_path)
    first = {p.name: p.read_bytes() for p in tmp_path.iterdir() if p.is_file()}
    emit_report(r, tmp_path)
    again = {p.name: p.read_bytes() for p in tmp_path.iterdir() if p.is_file()}
    assert first == again
    rows = (tmp_path / "report.csv").read_text().splitlines()
    assert rows[1] == "scalar,a,0.1,,,,,"
    assert rows[2].endswith(",5,4")


def test_emit_report_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        emit_report(Report("x"), tmp_path, formats=["xml"])


def test_verify_flags_inconsistent_summary(tmp_path):
    r = Report("x")
    r.check("b", False)
    emit_report(r, tmp_path)
    doc = json.loads((tmp_path / "report.json").read_text())
    doc["passed"] = True
    (tmp_path / "report.json").write_text(json.dumps(doc))
    assert verify_report(tmp_path)[0] == 1

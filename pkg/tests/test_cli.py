import json

import pytest

from manhattan_workbench import __version__, fixtures
from manhattan_workbench.cli import (CURVE_COLUMNS, EXIT_CONDITION, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main,
                                     read_curve_csv)
from manhattan_workbench.config import RunConfig, rep_to_dict

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")

FAST = {"truncation": {"n_max": 8}, "solver": {"rays": 5}}


def write(tmp_path, data, name="c.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def run(tmp_path, command, data, *extra):
    cfg = write(tmp_path, data)
    out = tmp_path / "out"
    return main([command, "--config", str(cfg), "--out", str(out), *extra]), out


def test_validate_fixture(tmp_path, capsys):
    code, out = run(tmp_path, "validate", {"pair": {"fixture": "F1F3"}, "words": [[["h1", 2], ["p1", -1]]]})
    assert code == EXIT_OK
    report = json.loads((out / "validate.json").read_text())
    assert report["passed"] and report["positivity_gap"]["rho1"] > 0
    assert report["words"][0]["rho1"]["class"] == "hyperbolic"
    assert "C3" in capsys.readouterr().out


def test_validate_overlapping_arcs(tmp_path):
    rep = rep_to_dict(fixtures.rep("F1"))
    rep["arcs"]["h2"] = [0.0, 1.43]
    code, out = run(tmp_path, "validate", {"pair": {"rho1": rep, "rho2": rep}})
    assert code == EXIT_CONDITION
    report = json.loads((out / "validate.json").read_text())
    failed = [e for e in report["rho1"]["entries"] if not e["passed"]]
    assert any(e["condition"] == "C3" and e["witness"] for e in failed)


def test_missing_label_is_config_error(tmp_path, capsys):
    code, _ = run(tmp_path, "validate", {"pair": {"fixture": "F1"}, "words": [[["zz", 1]]]})
    assert code == EXIT_CONFIG
    assert "zz" in capsys.readouterr().err


def test_schema_violation_exit(tmp_path):
    code, _ = run(tmp_path, "entropy", {"pair": {"fixture": "F1"}, "solver": {"rays": "many"}})
    assert code == EXIT_CONFIG


def test_numerical_failure_exit(tmp_path):
    data = {"pair": {"fixture": "F1F3"}, "pressure": {"a": 1, "b": 0, "t": 0.6}, "truncation": {"max_power": 1}}
    code, _ = run(tmp_path, "pressure", data)
    assert code == EXIT_NUMERICAL


def test_pressure_infinite(tmp_path):
    code, out = run(tmp_path, "pressure", {"pair": {"fixture": "F1"}, "pressure": {"a": 1, "b": 1, "t": 0.2}})
    assert code == EXIT_OK
    assert json.loads((out / "pressure.json").read_text())["estimate"]["value"] == "Infinite"


def test_entropy_conjugate(tmp_path):
    code, out = run(tmp_path, "entropy", {"pair": {"fixture": "F1F2"}})
    assert code == EXIT_OK
    res = json.loads((out / "entropy.json").read_text())
    assert 0.5 < res["h1"] < 1
    assert abs(res["h1"] - res["h2"]) <= 1e-6


def test_curve_csv_format_and_determinism(tmp_path):
    data = {"pair": {"fixture": "F1F3"}, **FAST}
    cfg = write(tmp_path, data)
    assert main(["curve", "--config", str(cfg), "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(["curve", "--config", str(cfg), "--out", str(tmp_path / "b")]) == EXIT_OK
    first = (tmp_path / "a" / "curve.csv").read_bytes()
    assert first == (tmp_path / "b" / "curve.csv").read_bytes()
    header, rows = read_curve_csv(tmp_path / "a" / "curve.csv")
    assert header == {"config_hash": RunConfig.from_dict(data).config_hash, "version": __version__}
    assert first.decode().splitlines()[1] == ",".join(CURVE_COLUMNS)
    thetas = [r["theta"] for r in rows]
    assert thetas == sorted(thetas) and len(rows) == 7


def test_overrides_change_hash(tmp_path):
    cfg = write(tmp_path, {"pair": {"fixture": "F1F3"}, **FAST})
    main(["curve", "--config", str(cfg), "--out", str(tmp_path / "a")])
    main(["curve", "--config", str(cfg), "--out", str(tmp_path / "b"), "--rays", "3"])
    ha, _ = read_curve_csv(tmp_path / "a" / "curve.csv")
    hb, rows = read_curve_csv(tmp_path / "b" / "curve.csv")
    assert ha["config_hash"] != hb["config_hash"] and len(rows) == 5


def test_rigidity_perturbed(tmp_path):
    code, out = run(tmp_path, "rigidity", {"pair": {"fixture": "F1F3"}})
    assert code == EXIT_OK
    rep = json.loads((out / "rigidity.json").read_text())
    assert rep["bishop_steger_gap"] > 2 * rep["errors"]["bishop_steger_gap"]
    assert rep["thurston_gap"] > 2 * rep["errors"]["thurston_gap"]
    assert (out / "curve.csv").exists()


def test_oracle_table(tmp_path):
    code, out = run(tmp_path, "oracle", {"pair": {"fixture": "F1F3"}, "oracle": {"weights": [[1, 0], [1, 1]]}})
    assert code == EXIT_OK
    lines = (out / "oracle.csv").read_text().splitlines()
    assert lines[0].startswith("# config_hash=") and len(lines) == 4
    assert all(l.endswith("True") for l in lines[2:])


def test_compare(tmp_path):
    code, out = run(tmp_path, "compare", {"pair": {"fixture": "F1F2"}, "oracle": {"thurston_length": 9.0}})
    assert code == EXIT_OK
    res = json.loads((out / "compare.json").read_text())
    assert res["thurston_ratio"] == pytest.approx(1.0, abs=1e-6)
    assert res["length_ratio_min"] == pytest.approx(1.0, abs=1e-6)


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out

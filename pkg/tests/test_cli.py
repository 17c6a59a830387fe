import json
import math

import numpy as np
import pytest

from triosc import __version__
from triosc.cli import main
from triosc.errors import InvalidInputError
from triosc.scenario import bundled_scenarios, parse_scenario, read_table

BASE = {
    "name": "tiny",
    "couplings": [0.25, 0.3, 0.3],
    "state": {"kind": "fock", "occupations": [1, 1, 1]},
    "time": {"start": 0.0, "end": 2.0, "steps": 4},
    "analyses": [{"kind": "g2", "modes": [1, 3]}],
}


def write(tmp_path, config, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config, indent=2))
    return path


def with_analyses(*analyses):
    return {**BASE, "analyses": list(analyses)}


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_run_writes_table(tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(write(tmp_path, BASE)), "--out", str(out)]) == 0
    table = read_table(out / "tiny_00_g2.csv")
    np.testing.assert_allclose(table["t"], [0, 0.5, 1, 1.5, 2])
    assert table["g2_mode1"][0] == 0.0
    text = (out / "tiny_00_g2.csv").read_text()
    assert text.startswith("# triosc ")
    assert "# config: " in text


def test_run_is_deterministic_across_threads(tmp_path):
    cfg = write(tmp_path, with_analyses({"kind": "g2"}, {"kind": "squeezing", "mode_sets": [[1], [1, 2]]},
                                        {"kind": "cauchy-schwarz", "pairs": [[1, 2]]}))
    assert main(["run", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["run", str(cfg), "--out", str(tmp_path / "b"), "--threads", "3"]) == 0
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_empty_analyses_is_validation_error(tmp_path, capsys):
    out = tmp_path / "out"
    assert_exit(main, ["run", str(write(tmp_path, with_analyses())), "--out", str(out)], 1)
    assert not out.exists()
    assert "analyses" in capsys.readouterr().err


def assert_exit(fn, argv, code):
    try:
        got = fn(argv)
    except SystemExit as exc:
        got = exc.code
    assert got == code


def test_unknown_key_names_line(tmp_path, capsys):
    config = {**BASE, "colour": "blue"}
    path = write(tmp_path, config)
    line = next(i for i, text in enumerate(path.read_text().splitlines(), 1) if '"colour"' in text)
    assert_exit(main, ["run", str(path)], 1)
    assert f"line {line}, field colour" in capsys.readouterr().err


@pytest.mark.parametrize("patch, field", [
    ({"couplings": [-0.1, 0.3, 0.3]}, "couplings"),
    ({"state": {"kind": "fock", "occupations": [1.5, 0, 0]}}, "state"),
    ({"time": {"start": 0, "end": 1, "steps": 0}}, "steps"),
    ({"analyses": [{"kind": "sum-squeezing", "pairs": [[1, 1]]}]}, "pairs"),
    ({"analyses": [{"kind": "nonsense"}]}, "analyses"),
    ({"analyses": [{"kind": "g2", "file": "../escape.csv"}]}, "file"),
])
def test_field_errors(patch, field):
    with pytest.raises(InvalidInputError, match=field):
        parse_scenario(json.dumps({**BASE, **patch}, indent=2))


def test_malformed_json_reports_position():
    with pytest.raises(InvalidInputError, match="line 2, column"):
        parse_scenario('{\n  "name": }')


def test_duplicate_output_names():
    with pytest.raises(InvalidInputError, match="same file"):
        parse_scenario(json.dumps(with_analyses({"kind": "g2", "file": "x.csv"}, {"kind": "g2", "file": "x.csv"})))


def test_missing_config_is_io_error(tmp_path):
    assert_exit(main, ["run", str(tmp_path / "nope.json")], 3)


def test_unwritable_output_is_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert_exit(main, ["run", str(write(tmp_path, BASE)), "--out", str(blocker)], 3)


def test_tolerance_failure_leaves_no_files(tmp_path, capsys):
    cfg = write(tmp_path, with_analyses({"kind": "g2"}, {"kind": "pnd", "t": 8.0, "mode": 3, "n_max": 4,
                                                          "couplings": [0.3, 0.3, 0.3],
                                                          "state": {"kind": "fock", "occupations": [0, 0, 1]}}))
    out = tmp_path / "out"
    assert_exit(main, ["run", str(cfg), "--out", str(out)], 2)
    assert not out.exists() or not any(out.iterdir())
    assert "analysis 1 (pnd)" in capsys.readouterr().err


def test_unsupported_input_is_validation_error(tmp_path):
    cfg = write(tmp_path, with_analyses({"kind": "pnd", "t": 1.0, "mode": 1, "n_max": 4,
                                         "state": {"kind": "thermal", "occupations": [0, 0, 0]}}))
    assert_exit(main, ["run", str(cfg), "--out", str(tmp_path / "o")], 1)


def test_usage_error_exit_code():
    assert_exit(main, ["run"], 1)
    assert_exit(main, ["run", "x.json", "--threads", "0"], 1)


def test_oracle_check_default_analysis(tmp_path):
    cfg = write(tmp_path, {**BASE, "couplings": [0.0, 0.3, 0.2], "time": {"start": 0, "end": 1, "steps": 1}})
    out = tmp_path / "out"
    assert main(["oracle-check", str(cfg), "--out", str(out)]) == 0
    (table,) = [read_table(p) for p in out.iterdir()]
    assert np.all(table["difference"] <= table["tolerance"])


def test_verify_passes(capsys):
    assert main(["verify"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)


def test_grid_analyses_write_nan_for_undefined(tmp_path):
    cfg = write(tmp_path, {**BASE, "state": {"kind": "fock", "occupations": [0, 0, 0]},
                           "analyses": [{"kind": "g2", "modes": [3]}]})
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 0
    table = read_table(tmp_path / "o" / "tiny_00_g2.csv")
    assert math.isnan(table["g2_mode3"][0])


def test_bundled_scenarios_parse():
    names = {p.name for p in bundled_scenarios()}
    assert {"fig2.json", "fig7.json", "oracle-matrix.json"} <= names
    for p in bundled_scenarios():
        parse_scenario(p.read_text())

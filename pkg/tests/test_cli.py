import json

import pytest

from choquard.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main
from choquard.shooting import GroundState


def err_json(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_solve(tmp_path, capsys):
    out = tmp_path / "gs.json"
    assert main(["solve", "--dim", "3", "--radius", "5", "--out", str(out)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "lambda=" in text and "c=2.0688" in text
    gs = GroundState.from_json(out.read_text())
    assert gs.ball.radius == 5.0
    assert (tmp_path / "gs.csv").read_text().startswith("r,value")


def test_solve_whole_space(tmp_path, capsys):
    out = tmp_path / "inf.json"
    assert main(["solve", "--dim", "3", "--radius", "inf", "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["radius"] == "inf"


@pytest.mark.parametrize("argv", [
    ["solve", "--dim", "2", "--radius", "5"],
    ["solve", "--dim", "3", "--radius", "-1"],
    ["solve", "--dim", "3", "--radius", "abc"],
    ["solve", "--dim", "3", "--radius", "5", "--tol-ode", "2"],
    ["sweep", "--radii", ""],
    ["sweep", "--radii", "2,2"],
    ["oracle3d", "--grid", "40"],
    ["oracle3d", "--radius", "inf"],
    ["bogus"],
    [],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE
    payload = err_json(capsys)
    assert payload["exit_code"] == EXIT_USAGE and payload["error"] in ("usage", "validation")


def test_numeric_failure(tmp_path, capsys):
    code = main(["solve", "--dim", "6", "--radius", "2", "--out", str(tmp_path / "x.json")])
    assert code == EXIT_NUMERIC
    assert err_json(capsys)["error"] == "ConvergenceError"


def test_sweep(tmp_path, capsys):
    csv_path, json_path = tmp_path / "s.csv", tmp_path / "s.json"
    code = main(["sweep", "--dim", "3", "--radii", "2,4", "--out", str(csv_path),
                 "--json", str(json_path), "--threads", "1"])
    assert code == EXIT_OK
    assert csv_path.read_text().splitlines()[0] == "R,c_R,lambda_R,amplitude,profile_distance,upper_bound,gap"
    assert len(json.loads(json_path.read_text())) == 2
    assert capsys.readouterr().out == csv_path.read_text()


def test_verify_kernel(capsys):
    assert main(["verify", "--suite", "kernel"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2 and all(line.startswith("PASS") for line in lines)


def test_oracle3d(tmp_path, capsys):
    out = tmp_path / "o"
    code = main(["oracle3d", "--radius", "3", "--grid", "33", "--out", str(out)])
    assert code == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["n_grid"] == 33 and summary["radial_deviation"] < 0.03
    assert (out / "u.bin").stat().st_size == 8 * 33 ** 3
    assert json.loads((out / "u.bin.json").read_text())["n"] == 33


def test_solve_output_is_reproducible(tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert main(["solve", "--dim", "3", "--radius", "2", "--out", str(p)]) == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

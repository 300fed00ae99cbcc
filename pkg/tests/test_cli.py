import json

import pandas as pd
import pytest
import yaml

from landau_kam.cli import GROWTH_COLUMNS, REDUCE_COLUMNS, build_parser, main
from landau_kam.errors import (
    ConfigError,
    DegenerateNormalFormError,
    DivergenceError,
    GeneratorBranchError,
    LandauKamError,
    ResonanceError,
    exit_code_for,
)


def write_config(tmp_path, data):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(data))
    return str(path)


def test_constants_command(tmp_path):
    config = write_config(tmp_path, {"command": "constants", "omegas": [1.0, 2.0, 2.4]})
    assert main(["constants", "--config", config, "--out", str(tmp_path / "out")]) == 0
    table = pd.read_csv(tmp_path / "out" / "constants.csv")
    assert list(table.columns) == ["omega", "B0", "c_omega", "d_omega", "a_omega", "status"]
    assert list(table["status"]) == ["ok", "resonant", "ok"]
    assert table.loc[2, "c_omega"] == pytest.approx(-0.8181818181818, rel=1e-10)


def test_reduce_command_writes_results(tmp_path):
    config = write_config(tmp_path, {"command": "reduce", "epsilons": [0.0, 0.01], "omegas": [2.4]})
    out = tmp_path / "out"
    assert main(["reduce", "--config", config, "--out", str(out)]) == 0
    summary = pd.read_csv(out / "reduce.csv")
    assert list(summary.columns) == REDUCE_COLUMNS
    assert list(summary["status"]) == ["converged", "converged"]
    assert summary.loc[1, "second_over_eps2"] == pytest.approx(-0.8181818181818, rel=1e-3)
    data = json.loads((out / "reduce_000_000.json").read_text())
    assert data["normal_form"] == {"kind": "landau", "nu1": 2.0, "c": 0.0}
    assert (out / "reduce_norms.csv").exists()


def test_reduce_with_workers_matches_sequential_run(tmp_path):
    data = {"command": "reduce", "epsilons": [0.0, 0.01, 0.005], "omegas": [2.4, 3.0]}
    config = write_config(tmp_path, data)
    sequential, parallel = tmp_path / "sequential", tmp_path / "parallel"
    assert main(["reduce", "--config", config, "--out", str(sequential)]) == 0
    assert main(["reduce", "--config", config, "--out", str(parallel), "--jobs", "2"]) == 0
    expected = pd.read_csv(sequential / "reduce.csv")
    pd.testing.assert_frame_equal(pd.read_csv(parallel / "reduce.csv"), expected)
    assert list(expected["epsilon"]) == [0.0, 0.01, 0.005] * 2
    assert (parallel / "reduce_001_002.json").exists()


def test_reduce_exits_on_resonance(tmp_path):
    config = write_config(tmp_path, {"command": "reduce", "epsilons": [0.01], "omegas": [2.0]})
    assert main(["reduce", "--config", config, "--out", str(tmp_path / "out")]) == 3


def test_invalid_config_exits_with_config_code(tmp_path):
    config = write_config(tmp_path, {"command": "reduce", "epsilons": [1.5]})
    assert main(["reduce", "--config", config, "--out", str(tmp_path / "out")]) == 2
    assert main(["reduce", "--config", str(tmp_path / "absent.yaml")]) == 2


def test_measure_rejects_small_sample(tmp_path):
    config = write_config(tmp_path, {"command": "measure", "measure": {"samples": 0}})
    assert main(["measure", "--config", config, "--out", str(tmp_path / "out")]) == 2


def test_landau_growth_command(tmp_path):
    config = write_config(tmp_path, {
        "command": "landau-growth",
        "epsilons": [0.05],
        "omegas": [2.4],
        "oracle": {"horizon": 200.0},
    })
    out = tmp_path / "out"
    assert main(["landau-growth", "--config", config, "--out", str(out)]) == 0
    table = pd.read_csv(out / "landau_growth.csv")
    assert list(table.columns) == GROWTH_COLUMNS
    assert list(table["gauge"]) == ["landau", "landau", "symmetric"]
    assert table.loc[1, "epsilon"] == pytest.approx(0.025)
    assert table.loc[0, "predicted"] == pytest.approx(4.0 * 0.8181818181818 * 0.05 ** 2, rel=1e-9)


def test_seed_and_jobs_overrides_are_parsed():
    args = build_parser().parse_args(["measure", "--seed", "5", "--jobs", "3", "--verbose"])
    assert (args.command, args.seed, args.jobs, args.verbose) == ("measure", 5, 3, True)
    with pytest.raises(SystemExit):
        build_parser().parse_args(["plot"])


@pytest.mark.parametrize("error, code", [
    (ConfigError("bad"), 2),
    (ResonanceError("resonant"), 3),
    (DegenerateNormalFormError("degenerate"), 3),
    (DivergenceError("diverged"), 4),
    (GeneratorBranchError("branch"), 4),
    (LandauKamError("other"), 1),
    (RuntimeError("system"), 1),
])
def test_exit_codes(error, code):
    assert exit_code_for(error) == code

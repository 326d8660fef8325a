import json

import pytest

from dssa import cli


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory, data_dir):
    out = tmp_path_factory.mktemp("run")
    code = cli.main(["run", str(data_dir / "one_pole.cir"), "--seed", "2", "--iters", "150",
                     "--train", "20", "--test", "10", "-o", str(out)])
    return out, code


def test_run_writes_artifacts(run_dir):
    out, code = run_dir
    assert code in (cli.EXIT_OK, cli.EXIT_INFEASIBLE)
    report = json.loads((out / "result.json").read_text())
    assert report["config"]["ga"]["iterations"] == 150
    assert report["config"]["train"] == 20 and report["config"]["T"] == 15
    assert set(report["expression"]) == {"num", "den"}
    assert report["test"]["points"] == 10
    errors = (out / "errors.csv").read_text().splitlines()
    assert errors[0] == "d,dc_error_db,max_root_error_pct" and len(errors) == 11
    resp = (out / "response.csv").read_text().splitlines()
    assert resp[0].startswith("freq_hz,exact_mag_db")
    assert len(resp) == 8  # C = 7 for the one-pole grid


def test_exit_code_matches_feasibility(run_dir):
    out, code = run_dir
    feasible = json.loads((out / "result.json").read_text())["objective"]["train_feasible"]
    assert code == (cli.EXIT_OK if feasible else cli.EXIT_INFEASIBLE)


def test_eval_reproduces_run_metrics(run_dir, data_dir, capsys):
    out, _ = run_dir
    report = json.loads((out / "result.json").read_text())
    capsys.readouterr()
    assert cli.main(["eval", str(data_dir / "one_pole.cir"), str(out / "result.json")]) == 0
    text = capsys.readouterr().out
    assert f"avg {report['test']['avg_dc_error_db']:.4g}" in text


def test_eval_exact_expression_is_error_free(tmp_path, data_dir, capsys):
    exact = {"expression": {"num": [[["-", "gm1"]]], "den": [[["+", "g_r1"]], [["+", "c1"]]]}}
    path = tmp_path / "exact.json"
    path.write_text(json.dumps(exact))
    assert cli.main(["eval", str(data_dir / "one_pole.cir"), str(path), "--seed", "5"]) == 0
    assert "test feasible    True" in capsys.readouterr().out


def test_eval_unknown_parameter(tmp_path, data_dir, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"expression": {"num": [[["+", "zz"]]], "den": [[["+", "c1"]]]}}))
    assert cli.main(["eval", str(data_dir / "one_pole.cir"), str(path)]) == cli.EXIT_ERROR
    assert "unknown parameter" in capsys.readouterr().err


def test_exact_command(data_dir, capsys):
    assert cli.main(["exact", str(data_dir / "one_pole.cir")]) == 0
    assert "total 3" in capsys.readouterr().out


def test_sample_command(data_dir, capsys):
    assert cli.main(["sample", str(data_dir / "rc_ladder.cir"), "-n", "4", "--seed", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("d,g_r1,g_r2,c2") and len(lines) == 5


def test_missing_file(capsys):
    assert cli.main(["exact", "does/not/exist.cir"]) == cli.EXIT_ERROR
    assert "file not found" in capsys.readouterr().err


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# overrides\npopulation = 20\nw1 = 0.5\nw2=0.5\ntrain = 30\nts_init_probs = 0.6, 0.2, 0.2\n")
    settings = cli.read_config_file(cfg)
    run = cli.build_run_config("x.cir", settings)
    assert run.ga.population == 20 and run.fitness.w1 == 0.5 and run.train == 30
    assert run.ga.ts_init_probs == (0.6, 0.2, 0.2)
    assert run.test == 50 and run.points_per_decade == 3


@pytest.mark.parametrize("text", ["bogus = 1\n", "population\n", "population = many\n", "p_r = 0.5\n"])
def test_bad_config(tmp_path, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    with pytest.raises(cli.ConfigError):
        cli.build_run_config("x.cir", cli.read_config_file(cfg))


def test_defaults_match_reference_settings():
    run = cli.build_run_config("x.cir", {})
    assert (run.ga.population, run.ga.iterations) == (50, 1000)
    assert (run.ga.p_r, run.ga.p_c, run.ga.p_m) == (0.1, 0.5, 0.4)
    assert (run.fitness.w1, run.fitness.w2, run.fitness.T_dc, run.fitness.T_root) == (0.8, 0.2, 3, 0.3)
    assert (run.train, run.test, run.T, run.points_per_decade) == (100, 50, 15, 3)

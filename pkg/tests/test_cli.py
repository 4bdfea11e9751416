import argparse

import pytest

from sslbpinn.cli import main, parse_seeds
from sslbpinn.io import CSV_COLUMNS, read_csv


@pytest.fixture
def short_config(tmp_path):
    path = tmp_path / "short.toml"
    path.write_text("sim.duration = 0.2\n")
    return str(path)


def test_parse_seeds():
    assert parse_seeds("0..3") == [0, 1, 2, 3]
    assert parse_seeds("4,7") == [4, 7]
    assert parse_seeds("5") == [5]
    for bad in ("3..1", "a..b", "x"):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_seeds(bad)


def test_run_writes_outputs(tmp_path, short_config, capsys):
    out = tmp_path / "run"
    assert main(["run", "--config", short_config, "--seed", "2", "--out", str(out)]) == 0
    assert "seed=2" in capsys.readouterr().out
    assert read_csv(out / "trace.csv")["t"].size == 200
    assert (out / "weights.csv").exists()
    assert "sim.seed = 2" in (out / "config.toml").read_text()


def test_run_respects_seed_env(tmp_path, short_config, capsys, monkeypatch):
    monkeypatch.setenv("SSLBPINN_SEED", "9")
    assert main(["run", "--config", short_config]) == 0
    assert "seed=9" in capsys.readouterr().out


def test_compare_table_and_files(tmp_path, short_config, capsys):
    out = tmp_path / "cmp"
    assert main(["compare", "--config", short_config, "--seeds", "0..1", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "Improvement [%]" in text and "seeds: 2/2 complete" in text
    assert (out / "report.csv").exists() and (out / "report.txt").exists()
    assert (out / "seed0_errors.svg").exists() and (out / "seed0_f_tilde.svg").exists()


def test_plot_from_csv(tmp_path, short_config):
    out = tmp_path / "run"
    main(["run", "--config", short_config, "--out", str(out)])
    assert main(["plot", "--trace", str(out / "trace.csv"), "--baseline", str(out / "trace.csv"),
                 "--out", str(tmp_path / "fig")]) == 0
    assert (tmp_path / "fig_errors.svg").read_text().startswith("<?xml")


def test_check_passes(capsys):
    assert main(["check"]) == 0
    assert "6/6 checks passed" in capsys.readouterr().out


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("gains.k1 = 'high'\n")
    assert main(["run", "--config", str(bad)]) == 2
    assert "config error" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.toml")]) == 2


def test_usage_errors_exit_2():
    for argv in (["run", "--bogus"], [], ["compare", "--seeds", "9..1"], ["launch"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_plot_rejects_non_trace(tmp_path, capsys):
    path = tmp_path / "x.csv"
    path.write_text("a,b\n")
    assert main(["plot", "--trace", str(path), "--out", str(tmp_path / "p")]) == 1
    assert len(CSV_COLUMNS) == 17

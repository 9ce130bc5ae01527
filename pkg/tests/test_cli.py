import json

import pytest

from racorn import PriceRelativeSeries, write_csv
from racorn.cli import main
from racorn.config import ConfigError, RunConfig, dump_config, parse_config, parse_grid

from conftest import random_walk

FAST = ["--set", "w_grid=1,2", "--set", "rho_grid=0,0.5", "--set", "lambda_grid=0,0.02",
        "--set", "lambda_grid_c=0,0.05", "--set", "top_fraction=0.5"]


@pytest.fixture
def dataset(tmp_path):
    s = random_walk(40, 3, seed=17)
    s = PriceRelativeSeries(s.relatives, ("AAA", "BBB", "CCC"), tuple(f"2020-01-{i + 1:02d}" for i in range(40)))
    path = tmp_path / "rel.csv"
    write_csv(path, s)
    return path


def test_grid_syntax():
    assert parse_grid("0:0.3:0.1") == (0.0, 0.1, 0.2, 0.3)
    assert parse_grid("1, 2,5") == (1.0, 2.0, 5.0)
    with pytest.raises(ConfigError):
        parse_grid("0:1")


def test_default_grids():
    cfg = RunConfig()
    assert cfg.w_grid == (1, 2, 3, 4, 5)
    assert cfg.rho_grid[0] == 0.0 and cfg.rho_grid[-1] == 0.9 and len(cfg.rho_grid) == 10
    assert cfg.lambda_grid == (0.0, 0.01, 0.02, 0.03)
    assert cfg.lambda_grid_c[-1] == 0.1 and len(cfg.lambda_grid_c) == 11
    assert cfg.top_fraction == 0.1
    assert cfg.inner_weighting == "unnormalized"


def test_config_file_round_trip():
    cfg = RunConfig(data="x.csv", w_grid=(1, 3), top_fraction=0.2)
    assert parse_config(dump_config(cfg)) == cfg


def test_config_comments_and_sections():
    cfg = parse_config("""
# full-line comment
[strategy]
strategies = CORN-K, UCRP   ; inline comment
rho_grid = 0:0.2:0.1
[solver]
max_iterations = 50
""")
    assert cfg.strategies == ("CORN-K", "UCRP")
    assert cfg.rho_grid == (0.0, 0.1, 0.2)
    assert cfg.max_iterations == 50


def test_unknown_key_suggests():
    with pytest.raises(ConfigError, match=r"'lamda_grid'.*'lambda_grid'"):
        parse_config("[strategy]\nlamda_grid = 0, 0.01\n")


def test_key_in_wrong_section():
    with pytest.raises(ConfigError, match=r"belongs in \[solver\]"):
        parse_config("[strategy]\ntolerance = 1e-6\n")


def test_unknown_section():
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config("[strategies]\nw_grid = 1\n")


def test_bad_values_rejected():
    with pytest.raises(ConfigError):
        parse_config("[strategy]\ntop_fraction = 0\n")
    with pytest.raises(ConfigError):
        parse_config("[strategy]\nw_grid = 1.5\n")
    with pytest.raises(ConfigError):
        parse_config("[strategy]\nstrategies = OLMAR\n")


def test_backtest_three_strategies(dataset, tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["backtest", "--data", str(dataset), "--mode", "relatives", "--out", str(out),
                 "--strategy", "CORN-K", "--strategy", "RACORN-K", "--strategy", "RACORN-C-K", *FAST])
    assert code == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == sorted(["CORN-K.json", "CORN-K_wealth.csv", "RACORN-K.json", "RACORN-K_wealth.csv",
                            "RACORN-C-K.json", "RACORN-C-K_wealth.csv", "metrics.csv"])
    table = (out / "metrics.csv").read_text().splitlines()
    assert table[0] == "strategy,RET,SR,MDD" and len(table) == 4
    text = capsys.readouterr().out
    assert "40 periods x 3 assets" in text and "RACORN-C-K" in text


def test_report_embeds_resolved_config(dataset, tmp_path):
    out = tmp_path / "out"
    main(["backtest", "--data", str(dataset), "--out", str(out), "--strategy", "RACORN-K", *FAST])
    doc = json.loads((out / "RACORN-K.json").read_text())
    cfg = doc["config"]
    assert cfg["lambda_grid"] == [0.0, 0.02]
    assert cfg["max_iterations"] == 2000 and cfg["periods_per_year"] == 252
    assert doc["period_labels"][1] == "2020-01-01"


def test_reports_identical_across_worker_counts(dataset, tmp_path):
    texts = []
    for workers in (1, 4):
        out = tmp_path / f"w{workers}"
        main(["backtest", "--data", str(dataset), "--out", str(out), "--workers", str(workers),
              "--strategy", "RACORN-C-K", "--strategy", "CORN-K", *FAST])
        texts.append({p.name: p.read_bytes() for p in out.iterdir()})
    assert texts[0] == texts[1]


def test_backtest_with_config_file(dataset, tmp_path):
    conf = tmp_path / "run.ini"
    conf.write_text(f"[data]\ndata = {dataset}\nmode = relatives\n[strategy]\nstrategies = UBAH, UCRP, EG\n"
                    f"[output]\nout = {tmp_path / 'o'}\n")
    assert main(["backtest", "--config", str(conf)]) == 0
    assert (tmp_path / "o" / "EG.json").exists()


def test_unknown_override_key(dataset, tmp_path, capsys):
    code = main(["backtest", "--data", str(dataset), "--out", str(tmp_path / "o"), "--set", "lamda_grid=0"])
    assert code != 0
    err = capsys.readouterr().err
    assert "lamda_grid" in err and "lambda_grid" in err
    assert not (tmp_path / "o").exists() or not any((tmp_path / "o").iterdir())


def test_empty_dataset(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["backtest", "--data", str(empty), "--out", str(tmp_path / "o")]) != 0
    assert str(empty) in capsys.readouterr().err


def test_prices_mode(tmp_path, capsys):
    path = tmp_path / "p.csv"
    path.write_text("date,A,B\nd0,10,20\nd1,11,19\nd2,12,21\nd3,11,22\n")
    assert main(["backtest", "--data", str(path), "--mode", "prices", "--out", str(tmp_path / "o"),
                 "--strategy", "UCRP"]) == 0
    assert "3 periods x 2 assets" in capsys.readouterr().out


def test_validate_summary(dataset, capsys):
    assert main(["validate", "--data", str(dataset), "--mode", "relatives"]) == 0
    out = capsys.readouterr().out
    assert "40 periods x 3 assets" in out and "valid" in out


def test_validate_zero_price(tmp_path, capsys):
    path = tmp_path / "p.csv"
    path.write_text("A,B\n10,20\n0,21\n11,-3\n")
    assert main(["validate", "--data", str(path), "--mode", "prices"]) == 1
    out = capsys.readouterr().out
    assert out.count("violation:") == 2 and "line 3" in out and "line 4" in out


def test_validate_suspicious_relative(tmp_path, capsys):
    path = tmp_path / "r.csv"
    path.write_text("A,B\n1.01,0.99\n17.0,1.0\n")
    assert main(["validate", "--data", str(path), "--mode", "relatives"]) == 0
    assert "warning" in capsys.readouterr().out


def test_sweep_lambda_max(dataset, tmp_path, capsys):
    out = tmp_path / "o"
    code = main(["sweep", "--data", str(dataset), "--out", str(out), "--strategy", "RACORN-K",
                 "--axis", "lambda_max", "--value", "0", "--value", "0.03", "--value", "0.1", *FAST])
    assert code == 0
    rows = (out / "sweep_RACORN-K_lambda_max.csv").read_text().splitlines()
    assert len(rows) == 4


def test_sweep_single_value_matches_backtest(dataset, tmp_path):
    main(["sweep", "--data", str(dataset), "--out", str(tmp_path / "s"), "--strategy", "RACORN-K",
          "--axis", "top_fraction", "--value", "0.5", *FAST])
    main(["backtest", "--data", str(dataset), "--out", str(tmp_path / "b"), "--strategy", "RACORN-K", *FAST])
    sweep = (tmp_path / "s" / "sweep_RACORN-K_top_fraction.csv").read_text().splitlines()[1].split(",")[1:]
    back = (tmp_path / "b" / "metrics.csv").read_text().splitlines()[1].split(",")[1:]
    assert sweep == back


def test_sweep_inner_weighting(dataset, tmp_path):
    out = tmp_path / "o"
    code = main(["sweep", "--data", str(dataset), "--out", str(out), "--strategy", "RACORN-C-K",
                 "--axis", "inner_weighting", "--value", "normalized", "--value", "unnormalized", *FAST])
    assert code == 0
    assert len((out / "sweep_RACORN-C-K_inner_weighting.csv").read_text().splitlines()) == 3


def test_sweep_needs_one_strategy(dataset, tmp_path):
    assert main(["sweep", "--data", str(dataset), "--out", str(tmp_path), "--axis", "top_fraction",
                 "--value", "0.5"]) != 0

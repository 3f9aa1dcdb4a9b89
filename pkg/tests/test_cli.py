import csv
import math
from pathlib import Path

import pytest

from hpsgd import cli
from hpsgd.bounds import auxiliary
from hpsgd.config import format_config, load, parse_config, parse_text

CONFIG = """
[experiment]
mu = 0.5
x1 = equal_energy
T = 200
n_trials = 3
delta = 0.05
base_seed = 11

[objective]
kind = quadratic
d = 4
spectrum = logspace
lambda_min = 0.01

[noise]
kind = gaussian
sigma = 1.0

[schedule]
kind = inv_sqrt
c = auto
"""


@pytest.fixture
def config_file(tmp_path):
    p = tmp_path / "exp.ini"
    p.write_text(CONFIG)
    return p


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_minimal_config_fills_defaults(tmp_path):
    p = tmp_path / "min.ini"
    p.write_text("[objective]\nkind = quadratic\n[experiment]\nT = 1000\nn_trials = 100\ndelta = 0.05\n")
    cfg = parse_config(p)
    assert cfg.T == 1000 and cfg.n_trials == 100 and cfg.schedule.c > 0 and cfg.objective.d == 10


def test_config_errors(config_file):
    with pytest.raises(ValueError, match="cap"):
        parse_config(config_file, ["schedule.c=999"])
    with pytest.raises(ValueError, match="delta"):
        parse_config(config_file, ["experiment.delta=1.5"])
    with pytest.raises(ValueError, match="schedule.speed"):
        parse_config(config_file, ["schedule.speed=3"])
    with pytest.raises(ValueError, match="section"):
        parse_text("[optimizer]\nfoo = 1\n")
    with pytest.raises(ValueError):
        parse_config(config_file, ["badoverride"])
    assert parse_config(config_file, ["schedule.c=0.5"], force=True).schedule.c == 0.5


def test_effective_config_round_trips(config_file):
    cfg, conc = load(config_file, ["experiment.T_grid=8, 16, 32"])
    again, conc2 = parse_text(format_config(cfg, conc))
    assert again == cfg and conc2 == conc


def test_run_writes_csvs(config_file, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", "--config", str(config_file), "--out", str(out)]) == 0
    rows = read_csv(out / "trials.csv")
    assert len(rows) == 4
    assert rows[0] == ["trial", "T", "min_grad_sq", "f_final", "lemma2_holds", "theorem_holds", "theorem_rhs"]
    summary = read_csv(out / "summary.csv")
    assert len(summary) == 2 and summary[1][3] == "theorem1"
    eff = (out / "effective_config").read_text()
    assert "c = auto" not in eff and "# schedule.c=auto -> " in eff


def test_run_is_byte_identical(config_file, tmp_path, monkeypatch):
    outs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("HPSGD_THREADS", threads)
        out = tmp_path / f"o{threads}"
        assert cli.main(["run", "--config", str(config_file), "--out", str(out),
                         "--override", "experiment.n_trials=300"]) == 0
        outs.append(out)
    for name in ("trials.csv", "summary.csv", "effective_config"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_floats_round_trip(config_file, tmp_path):
    from hpsgd.harness import run_ensemble

    out = tmp_path / "out"
    cli.main(["run", "--config", str(config_file), "--out", str(out)])
    cfg, _ = load(config_file)
    res = run_ensemble(cfg)
    rows = read_csv(out / "trials.csv")[1:]
    assert [float(r[2]) for r in rows] == list(res.min_grad_sq)
    assert [float(r[3]) for r in rows] == list(res.f_final)


def test_rates_csv_lines(config_file, tmp_path):
    out = tmp_path / "rates"
    grid = "experiment.T_grid=32, 64, 128, 256, 512, 1024"
    assert cli.main(["rates", "--config", str(config_file), "--out", str(out), "--override", grid,
                     "--override", "schedule.kind=delayed_adagrad"]) == 0
    rows = read_csv(out / "rates.csv")
    assert len(rows) == 7 and rows[0] == ["T", "median_min_grad_sq", "q90", "slope_running"]
    assert rows[1][3] == "nan" and math.isfinite(float(rows[-1][3]))


def test_sweep_and_compare_forms(config_file, tmp_path):
    grid = "experiment.T_grid=50, 100"
    assert cli.main(["sweep", "--config", str(config_file), "--out", str(tmp_path / "s"), "--override", grid]) == 0
    assert len(read_csv(tmp_path / "s" / "trials.csv")) == 7
    assert len(read_csv(tmp_path / "s" / "summary.csv")) == 3
    assert cli.main(["compare-forms", "--config", str(config_file), "--out", str(tmp_path / "f"),
                     "--override", grid, "--override", "experiment.mu=0.9"]) == 0
    rows = read_csv(tmp_path / "f" / "forms.csv")
    assert float(rows[1][1]) <= 1e-12 and float(rows[2][2]) > 1e-6


def test_concentration_command(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[concentration]\nn_trials = 2000\ndeltas = 0.1\nunderstate = 10\nmax_d = 1\n")
    assert cli.main(["concentration", "--config", str(p), "--out", str(tmp_path / "c")]) == 0
    rows = read_csv(tmp_path / "c" / "concentration.csv")
    assert [r[0] for r in rows[1:]] == ["lemma1", "lemma1_understated", "max_bound"]
    assert float(rows[2][5]) > 0.1


def test_exit_codes(config_file, tmp_path):
    out = str(tmp_path / "x")
    assert cli.main(["frobnicate"]) == 1
    assert cli.main(["run", "--out", out]) == 1
    assert cli.main(["run", "--config", str(tmp_path / "missing.ini"), "--out", out]) == 1
    assert cli.main(["run", "--config", str(config_file), "--out", out, "--override", "schedule.c=999"]) == 1
    assert cli.main(["run", "--config", str(config_file), "--out", out, "--override", "experiment.delta=1.5"]) == 1
    assert cli.main(["rates", "--config", str(config_file), "--out", out]) == 1
    diverge = ["--override", "schedule.kind=constant", "--override", "schedule.c=50", "--override", "experiment.T=3000"]
    assert cli.main(["run", "--config", str(config_file), "--out", out, *diverge]) == 2


def test_force_logs_warning(config_file, tmp_path, caplog):
    code = cli.main(["run", "--config", str(config_file), "--out", str(tmp_path / "f"), "--force",
                     "--override", "schedule.c=0.2", "--override", "experiment.T=50"])
    assert code == 0
    assert any(r.levelname == "WARNING" and "cap" in r.getMessage() for r in caplog.records)


def test_selftest_passes(capsys):
    assert cli.main(["selftest"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 5 and all(line.startswith("PASS") for line in lines)


def test_selftest_catches_mutation(monkeypatch, capsys):
    monkeypatch.setattr(auxiliary, "EXP_QUAD_COEF", 0.5)
    assert cli.main(["selftest"]) == 3
    assert "FAIL scalar_inequalities" in capsys.readouterr().out


def test_shipped_configs_parse():
    root = Path(__file__).resolve().parents[1] / "configs"
    files = sorted(root.glob("*.ini"))
    assert files
    for f in files:
        load(f)


def test_inline_comments_allowed():
    cfg, _ = parse_text("[experiment]\nT = 64   # horizon\n[schedule]\nkind = constant ; fixed\nc = 0.01\n")
    assert cfg.T == 64 and cfg.schedule.kind == "constant"

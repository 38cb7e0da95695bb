import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from dampwave import cli
from dampwave.cli import (
    ConfigError,
    emit_plot_data,
    main,
    parse_config,
    read_lifespan_table,
)
from dampwave.lifespan import LifespanRecord, fit_power_law
from dampwave.numerics import grid_with_spacing
from dampwave.solvers import SolverState
from dampwave.verify import Residual


@pytest.fixture(autouse=True)
def _output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.ENV_OUTPUT, str(tmp_path / "results"))


def test_parse_sweep_eps_list():
    cfg = parse_config(["sweep", "--p", "2", "--class", "B", "--eps", "0.3,0.2,0.1"])
    assert cfg.eps == [0.3, 0.2, 0.1]
    assert cfg.data_class == "B" and cfg.p == 2.0


def test_missing_p_names_key():
    with pytest.raises(ConfigError) as exc:
        parse_config(["sweep", "--eps", "0.1"])
    assert exc.value.key == "p"


def test_flag_overrides_file(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# lifespan run\np = 2\nclass = A\neps = 0.4, 0.2\n")
    cfg = parse_config(["sweep", "--config", str(conf), "--p", "1.5"])
    assert cfg.p == 1.5 and cfg.data_class == "A" and cfg.eps == [0.4, 0.2]


def test_config_file_errors(tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("p = 2\ncolour = blue\n")
    with pytest.raises(ConfigError) as exc:
        parse_config(["sweep", "--config", str(conf)])
    assert exc.value.key == "colour"
    conf.write_text("p = two\n")
    with pytest.raises(ConfigError) as exc:
        parse_config(["sweep", "--config", str(conf), "--eps", "0.1"])
    assert exc.value.key == "p"


@pytest.mark.parametrize(
    "argv,key",
    [
        (["sweep", "--p", "4", "--eps", "0.1"], "p"),
        (["sweep", "--p", "2", "--eps", "0.1,-0.2"], "eps"),
        (["solve", "--p", "2", "--eps", "0.1,0.2"], "eps"),
        (["solve", "--p", "2", "--eps", "0.1", "--solver", "spectral"], "solver"),
        (["fit"], "input"),
        (["solve", "--p", "2", "--eps", "0.1", "--dx", "0"], "dx"),
    ],
)
def test_constraint_violations(argv, key):
    with pytest.raises(ConfigError) as exc:
        parse_config(argv)
    assert exc.value.key == key


def test_invalid_config_exit_code(capsys):
    assert main(["sweep", "--eps", "0.1"]) == 1
    assert "p" in capsys.readouterr().err
    assert main(["sweep", "--bogus"]) == 1


def test_output_dir_from_environment(tmp_path):
    cfg = parse_config(["verify"])
    assert cfg.out == str(tmp_path / "results")


def test_verify_exit_codes(monkeypatch):
    assert main(["verify"]) == 0
    bad = [Residual("mass identity", 1.0, 1e-3, 1e-6)]
    monkeypatch.setattr(cli, "verify_suite", lambda **kw: bad)
    assert main(["verify"]) == 2


def test_global_check_gate_and_pass(tmp_path, capsys):
    assert main(["global-check", "--data", "pos-u0", "--t-end", "5"]) == 1
    assert "hypothesis violated" in capsys.readouterr().out
    assert main(["global-check", "--t-end", "20", "--dx", "0.05"]) == 0


def test_solve_writes_snapshots(tmp_path):
    out = tmp_path / "solve"
    code = main(["solve", "--p", "2", "--eps", "0.1", "--t-end", "2", "--dx", "0.02", "--out", str(out)])
    assert code == 0
    run = next(out.iterdir())
    snaps = sorted(run.glob("snapshot_*.csv"))
    assert snaps
    head = snaps[0].read_text().splitlines()[0]
    assert head == "x,u,ut"
    meta = json.loads((run / "meta.json").read_text())
    assert meta["config"]["p"] == 2.0 and meta["results"]["censored"]


def synthetic_records(tag="B", slope=-4.0):
    eps = [0.4, 0.3, 0.2, 0.1, 0.05]
    return [LifespanRecord(e, 2.0, tag, e**slope, False) for e in eps]


def test_fit_on_synthetic_records(tmp_path, capsys):
    emit_plot_data(synthetic_records(), "loglog-lifespan", tmp_path / "in")
    assert main(["fit", "--input", str(tmp_path / "in"), "--out", str(tmp_path / "o")]) == 0
    assert "slope -4" in capsys.readouterr().out
    fit = json.loads(next((tmp_path / "o").glob("*/fit.json")).read_text())
    assert fit["B"]["slope"] == pytest.approx(-4.0)


def test_fit_reports_R(tmp_path, capsys):
    recs = synthetic_records("A", -2.0) + synthetic_records("B", -4.0)
    emit_plot_data(recs, "loglog-lifespan", tmp_path / "in")
    assert main(["fit", "--input", str(tmp_path / "in")]) == 0
    assert "R = 2" in capsys.readouterr().out


def test_emit_rows_and_censored(tmp_path):
    recs = [LifespanRecord(0.2, 2.0, "A", 166.7, False), LifespanRecord(0.1, 2.0, "A", 1e3, True)]
    (path,) = emit_plot_data(recs, "loglog-lifespan", tmp_path)
    lines = path.read_text().splitlines()
    assert lines[0] == "eps,t0,censored,class,p"
    assert len(lines) == 3
    assert lines[2].split(",")[2] == "true"


def test_emit_one_file_per_class_and_p(tmp_path):
    recs = synthetic_records("A") + synthetic_records("B")
    paths = emit_plot_data(recs, "loglog-lifespan", tmp_path)
    assert sorted(p.name for p in paths) == ["lifespan_A_p2.csv", "lifespan_B_p2.csv"]


def test_emit_other_kinds(tmp_path):
    (curve,) = emit_plot_data([(0.0, 0.0), (1.0, 0.5)], "error-curve", tmp_path)
    assert curve.read_text().splitlines()[0] == "t,error"
    g = grid_with_spacing(1.0, 0.5)
    st_ = SolverState(g.zeros(), g.zeros(), 0.25)
    (snap,) = emit_plot_data([st_], "snapshot", tmp_path)
    assert len(snap.read_text().splitlines()) == 1 + g.n_points


def test_emit_rejects_empty_and_unknown(tmp_path):
    with pytest.raises(ValueError):
        emit_plot_data([], "snapshot", tmp_path)
    with pytest.raises(ValueError):
        emit_plot_data([(0, 0)], "histogram", tmp_path)


record_strategy = st.builds(
    LifespanRecord,
    eps=st.floats(min_value=1e-4, max_value=10.0),
    p=st.just(2.0),
    data_class=st.sampled_from(["A", "B"]),
    t0=st.floats(min_value=1e-3, max_value=1e12),
    censored=st.booleans(),
)


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.lists(record_strategy, min_size=1, max_size=12))
def test_round_trip(tmp_path, recs):
    paths = emit_plot_data(recs, "loglog-lifespan", tmp_path / "rt")
    back = [r for p in paths for r in read_lifespan_table(p)]
    key = lambda r: (r.data_class, r.eps, r.t0, r.censored)
    assert sorted(map(key, back)) == sorted(map(key, recs))


def test_round_trip_reproduces_fit(tmp_path):
    rng = np.random.default_rng(3)
    eps = 0.8 * 2.0 ** (-np.arange(7) / 2)
    recs = [LifespanRecord(float(e), 2.0, "B", float(e**-4 * np.exp(rng.normal(0, 0.05))), False) for e in eps]
    (path,) = emit_plot_data(recs, "loglog-lifespan", tmp_path)
    assert fit_power_law(read_lifespan_table(path)) == fit_power_law(recs)


def test_sweep_tables_are_deterministic(tmp_path):
    argv = ["sweep", "--p", "2", "--class", "A", "--eps", "0.8,0.4,0.2", "--seed", "1"]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b")]) == 0
    ta = next((tmp_path / "a").glob("*/lifespan_A_p2.csv")).read_bytes()
    tb = next((tmp_path / "b").glob("*/lifespan_A_p2.csv")).read_bytes()
    assert ta == tb
    rows = ta.decode().splitlines()[1:]
    assert len(rows) == 3 and all(r.split(",")[2] == "false" for r in rows)

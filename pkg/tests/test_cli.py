import math

import pytest

from mirrorcool import read_rows, run_sweep, write_rows
from mirrorcool.cli import main
from mirrorcool.figures import FIGURES, make_figure
from mirrorcool.sweep import (ConfigError, RunConfig, build_config,
                              parse_config_text)


def test_parse_config_text():
    raw = parse_config_text("""
        # comment
        theta = 1e5
        eta = 0.8   # trailing comment
        scheme = momentum
        gain = 10
    """)
    assert raw == {"theta": "1e5", "eta": "0.8", "scheme": "momentum",
                   "gain": "10"}
    with pytest.raises(ConfigError):
        parse_config_text("not a key value line")


def test_build_config_validation_names_key():
    with pytest.raises(ConfigError, match="'eta'"):
        build_config({"eta": "0"})
    with pytest.raises(ConfigError, match="'scheme'"):
        build_config({"scheme": "bogus"})
    with pytest.raises(ConfigError, match="'sweep_start'"):
        build_config({"sweep_variable": "zeta", "sweep_scale": "log",
                      "sweep_start": "-1", "sweep_stop": "10"})
    with pytest.raises(ConfigError, match="'frobnicate'"):
        build_config({"frobnicate": "1"})
    cfg = build_config({"theta": "1e4", "gain": "5", "scheme": "momentum"})
    assert cfg.theta == 1e4 and cfg.gain == 5.0


def test_csv_round_trip(tmp_path):
    cfg = build_config({"scheme": "cold_damping", "gain": "100",
                        "sweep_variable": "zeta", "sweep_start": "1",
                        "sweep_stop": "1e4", "sweep_points": "7"})
    rows = run_sweep(cfg)
    path = tmp_path / "sweep.csv"
    write_rows(path, rows)
    back = read_rows(path)
    assert back == rows          # lossless at 17 significant digits


def test_sweep_row_ordering_and_values():
    cfg = build_config({"scheme": "cold_damping", "gain": "10",
                        "theta": "1e3", "eta": "0.8", "quality": "100",
                        "sweep_variable": "zeta", "sweep_start": "1",
                        "sweep_stop": "100", "sweep_points": "5",
                        "method": "all", "n_traj": "40",
                        "n_steps": "20000"})
    rows = run_sweep(cfg)
    assert len(rows) == 5 * 4
    values = [r.value for r in rows[::4]]
    assert values == sorted(values)
    for i in range(0, len(rows), 4):
        group = rows[i:i + 4]
        assert [r.method for r in group] == ["analytic", "spectral",
                                             "lyapunov", "ensemble"]
        # analytic and lyapunov agree tightly; spectral within bath-model slack
        assert group[2].q2 == pytest.approx(group[0].q2, rel=1e-6)
        assert group[1].q2 == pytest.approx(group[0].q2, rel=1e-3)


def test_cmd_steady_verify(capsys):
    code = main(["steady", "--scheme", "cold_damping", "--gain", "100",
                 "--zeta", "100", "--eta", "1", "--theta", "1e5",
                 "--verify"])
    out = capsys.readouterr().out
    assert code == 0
    assert "q2=495.297" in out
    assert "spectral" in out and "lyapunov" in out


def test_cmd_steady_thermal_trivial(capsys):
    code = main(["steady", "--theta", "1e4", "--zeta", "0", "--gain", "0"])
    assert code == 0
    assert "q2=5000" in capsys.readouterr().out


def test_cmd_steady_invalid_eta(capsys):
    code = main(["steady", "--eta", "0"])
    assert code == 1
    assert "eta" in capsys.readouterr().err


def test_cmd_optimize(capsys):
    code = main(["optimize", "--scheme", "cold_damping", "--gain", "100",
                 "--eta", "0.8"])
    out = capsys.readouterr().out
    assert code == 0
    assert "111.8033989" in out
    code = main(["optimize", "--scheme", "cold_damping", "--gain", "0"])
    assert code == 1


def test_cmd_sweep_writes_csv(tmp_path, capsys):
    out = tmp_path / "rows.csv"
    code = main(["sweep", "--scheme", "momentum", "--gain", "10",
                 "--sweep-variable", "zeta", "--sweep-start", "1",
                 "--sweep-stop", "100", "--sweep-points", "5",
                 "--out", str(out)])
    assert code == 0
    assert len(read_rows(out)) == 5


def test_cmd_figure_unknown_name(capsys):
    assert main(["figure", "nosuchfig"]) == 1


def test_cmd_figure_emits_files(tmp_path):
    code = main(["figure", "fig3", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "fig3.csv").exists()
    assert (tmp_path / "plot_fig3.py").exists()
    assert (tmp_path / "fig3.png").stat().st_size > 0


def test_cmd_simulate_consistency(capsys):
    code = main(["simulate", "--scheme", "momentum", "--gain", "10",
                 "--zeta", "10", "--quality", "1e3", "--theta", "10",
                 "--n-steps", "200000", "--n-traj", "100", "--seed", "77000"])
    out = capsys.readouterr().out
    assert code == 0
    assert "ensemble" in out and "lyapunov" in out and "analytic" in out


def test_cmd_simulate_seed_repeat(capsys):
    args = ["simulate", "--scheme", "momentum", "--gain", "10", "--zeta",
            "10", "--quality", "1e3", "--theta", "10", "--n-steps", "40000",
            "--n-traj", "20", "--seed", "123456"]
    main(args)
    first = capsys.readouterr().out
    main(args)
    second = capsys.readouterr().out
    assert first == second


def test_figure_shapes():
    fig = make_figure("fig3")
    assert set(fig.curves) == {"g2=10", "g2=1000", "g2=100000", "g2=1e+07"}
    mins = [min(fig.curves[k]) for k in ("g2=10", "g2=1000", "g2=100000",
                                         "g2=1e+07")]
    assert mins == sorted(mins, reverse=True)   # higher gain, lower minimum
    assert mins[-1] == pytest.approx(1.138, abs=5e-3)

    sq = make_figure("fig6_squeeze")
    assert min(sq.curves["g1=1e+09"]) < 0.25 < min(sq.curves["g1=1e+07"])

    ent = make_figure("fig7", points=120)
    crossings = {}
    for lab, ys in ent.curves.items():
        crossings[lab] = next(x for x, y in zip(ent.x, ys) if y < 1.0)
    assert crossings["Q=1000"] < crossings["Q=3000"] < crossings["Q=10000"]
    for ys in ent.curves.values():
        assert all(b <= a * (1 + 1e-9) for a, b in zip(ys, ys[1:]))

    with pytest.raises(ValueError):
        make_figure("fig8")
    assert set(FIGURES) == {"fig3", "fig4", "fig5", "fig6_qp",
                            "fig6_squeeze", "fig7"}

import numpy as np
import pytest

from nkslab import cli, engine
from nkslab.errors import ConfigError

GENTLE_CFG = """
[domain]
mode = intermittent_GES
y = 0.5
n_per_subdomain = 10
amplitude_a = 1.0

[scheme]
c = 0.4
dt = 1e-7
t_final = 4e-4

[lambda]
kind = constant
value = 5.0

[forcing]
kind = zero

[schedule]
kind = explicit
instants = 0, 1e-4, 2e-4, 3e-4, 4e-4

[adaptation]
variant = GES_Alg1
sigma = 100.0

[output]
stride = 10
snapshot_stride = 500
"""


@pytest.fixture
def gentle_cfg_file(tmp_path):
    path = tmp_path / "gentle.cfg"
    path.write_text(GENTLE_CFG)
    return path


class TestParseConfig:
    def test_ges_preset_values(self):
        cfg = cli.parse_config("ges_fig2")
        assert cfg.mode == engine.INTERMITTENT_GES
        assert cfg.amplitude_A == 3.0
        assert cfg.Y == 0.5
        assert cfg.n_per_subdomain == 10
        assert cfg.c == 0.4
        assert cfg.dt == 1e-7
        assert cfg.t_final == 8e-3
        assert cfg.lambda_spec.value == pytest.approx(4 * np.pi**2 / 0.25 + 50, rel=1e-14)
        assert cfg.adaptation.sigma == 100.0
        assert cfg.adaptation.delta1 == 0.01
        expected = np.array([0, 1, 2, 2.8, 3.9, 5, 5.5, 6.5, 7, 7.6, 8]) * 1e-3
        np.testing.assert_allclose(cfg.schedule.instants, expected, rtol=1e-12)

    def test_guub_preset_forcing(self):
        cfg = cli.parse_config("guub_fig4")
        assert cfg.mode == engine.INTERMITTENT_GUUB
        assert cfg.forcing_spec.kind == "sinusoid"
        assert cfg.forcing_spec.amplitude == 12e3
        assert cfg.forcing_spec.angular_frequency == 20e3
        assert cfg.adaptation.variant == "GUUB_Alg4"

    def test_full_sensing_preset(self):
        cfg = cli.parse_config("full_sensing")
        assert cfg.mode == engine.FULL_SENSING_GPA
        assert cfg.adaptation.tau == 5e-4
        assert cfg.schedule is None

    def test_zero_dt_rejected(self, tmp_path):
        bad = GENTLE_CFG.replace("dt = 1e-7", "dt = 0")
        path = tmp_path / "bad.cfg"
        path.write_text(bad)
        with pytest.raises(ConfigError):
            cli.parse_config(str(path))

    def test_unknown_key_rejected(self, tmp_path):
        bad = GENTLE_CFG + "\n[output]\nnonsense = 1\n"
        path = tmp_path / "bad.cfg"
        path.write_text(bad)
        with pytest.raises(ConfigError):
            cli.parse_config(str(path))

    def test_unknown_section_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text(GENTLE_CFG + "\n[plotting]\ncolor = red\n")
        with pytest.raises(ConfigError):
            cli.parse_config(str(path))

    def test_missing_source(self):
        with pytest.raises(ConfigError):
            cli.parse_config("no_such_preset")

    def test_iss_derives_forcing_constants(self, tmp_path):
        text = GENTLE_CFG.replace("mode = intermittent_GES", "mode = intermittent_ISS")
        text = text.replace("variant = GES_Alg1", "variant = ISS_Alg3")
        text = text.replace("kind = zero",
                            "kind = sinusoid\namplitude = 100\nangular_frequency = 2e4")
        path = tmp_path / "iss.cfg"
        path.write_text(text)
        cfg = cli.parse_config(str(path))
        assert cfg.adaptation.C1 == pytest.approx(100.0)   # sqrt(2*0.5) * 100
        assert cfg.adaptation.C2 == pytest.approx(100.0)


class TestCsv:
    def test_round_trip_bit_identical(self, gentle_cfg_file, tmp_path):
        cfg = cli.parse_config(str(gentle_cfg_file))
        log = engine.run_closed_loop(cfg)
        out = tmp_path / "run.csv"
        cli.emit_csv(log, out)
        back = cli.read_csv(out)
        for a, b in zip(log.columns(), back.columns()):
            assert np.array_equal(a, b)

    def test_header_only_for_empty_log(self, tmp_path):
        import nkslab.lyapunov as lyap
        empty = lyap.TrajectoryLog(*[np.empty(0)] * 7)
        out = tmp_path / "empty.csv"
        cli.emit_csv(empty, out)
        assert out.read_text() == cli.CSV_HEADER + "\n"

    def test_row_count(self, tmp_path):
        import nkslab.lyapunov as lyap
        t = np.array([0.0, 1.0, 2.0])
        log = lyap.TrajectoryLog(t, t, t, t, t, t, t)
        out = tmp_path / "three.csv"
        cli.emit_csv(log, out)
        assert len(out.read_text().splitlines()) == 4

    def test_snapshot_files(self, gentle_cfg_file, tmp_path):
        cfg = cli.parse_config(str(gentle_cfg_file))
        log = engine.run_closed_loop(cfg)
        out = tmp_path / "run.csv"
        cli.emit_csv(log, out)
        snaps = sorted(tmp_path.glob("run_snapshot_*.csv"))
        assert len(snaps) == len(log.snapshot_times)
        first = snaps[0].read_text().splitlines()
        assert first[0] == "x,u"
        assert len(first) == 1 + len(log.meta["x_nodes"])


class TestSubcommands:
    def test_run_gentle(self, gentle_cfg_file, tmp_path, capsys):
        rc = cli.main(["run", str(gentle_cfg_file), "--out", str(tmp_path / "out")])
        captured = capsys.readouterr()
        assert rc == 0
        assert "[GES]" in captured.out
        assert (tmp_path / "out" / "gentle.csv").exists()

    def test_certify_pipeline(self, gentle_cfg_file, tmp_path, capsys):
        assert cli.main(["run", str(gentle_cfg_file), "--out", str(tmp_path)]) == 0
        csv_path = tmp_path / "gentle.csv"
        rc = cli.main(["certify", "ges", str(csv_path), "--sigma", "100"])
        assert rc == 0

    def test_certify_guub_needs_uniform_plateaus(self, tmp_path, capsys):
        import nkslab.lyapunov as lyap
        t = np.linspace(0, 1, 50)
        for name, level in (("a", 1.0), ("b", 1.5)):
            log = lyap.TrajectoryLog(t, np.full_like(t, level), np.zeros_like(t),
                                     np.zeros_like(t), np.zeros_like(t),
                                     np.zeros_like(t), np.zeros_like(t))
            cli.emit_csv(log, tmp_path / f"{name}.csv")
        rc = cli.main(["certify", "guub", str(tmp_path / "a.csv"), str(tmp_path / "b.csv")])
        assert rc == 0

    def test_oracle_gronwall(self, capsys):
        rc = cli.main(["oracle", "gronwall", "--V0", "1", "--theta", "1",
                       "--C", "2", "--delta", "1", "--t", "1"])
        captured = capsys.readouterr()
        assert rc == 0
        assert "bound=" in captured.out

    def test_oracle_envelope(self, capsys):
        rc = cli.main(["oracle", "envelope", "--trials", "50"])
        assert rc == 0

    def test_oracle_halperin(self, capsys):
        rc = cli.main(["oracle", "halperin", "--trials", "20", "--epsilon", "0.5"])
        assert rc == 0

    def test_validate_schedule(self, capsys):
        rc = cli.main(["validate-schedule", "ges_fig2"])
        captured = capsys.readouterr()
        assert rc == 0
        assert "dwell" in captured.out

    def test_backend_flag(self, gentle_cfg_file, capsys):
        rc = cli.main(["run", str(gentle_cfg_file), "--backend", "python"])
        captured = capsys.readouterr()
        assert rc == 0
        assert "backend=python" in captured.out

    def test_usage_error_exit_code(self, tmp_path):
        assert cli.main(["run", str(tmp_path / "missing.cfg")]) == 2

    def test_blowup_exit_code(self, tmp_path, gentle_cfg_file):
        text = gentle_cfg_file.read_text().replace(
            "t_final = 4e-4", "t_final = 4e-4\nblowup_cap = 1e-9")
        bad = tmp_path / "explodes.cfg"
        bad.write_text(text)
        assert cli.main(["run", str(bad)]) == 3

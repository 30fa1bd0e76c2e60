import numpy as np
import pytest
from click.testing import CliRunner

from wavetails.cli import main

EXAMPLE_CONFIG = """
[run]
seed = 7
tol = 1e-10
n_max = 2
orders = 2
horizon = 16.0
t_end = 14.0
fit_window = [8.0, 13.0]

[system]
kind = "example-s1"

[initial]
kind = "preset-sin"
"""

ANTI_SILENT_CONFIG = """
[run]
seed = 1

[system]
kind = "custom"

[system.custom]
d = 1
m = 1
b_s = 1.0
eta_mn = 1.0
gjl = [["exp(2*t)"]]
alpha = [["1"]]
zeta = [["0"]]
alpha_inf = [[1.0]]
zeta_inf = [[0.0]]
xj = [ [["0"]] ]
"""

FREE_CONFIG = """
[run]
seed = 3
tol = 1e-10
n_max = 1

[system]
kind = "custom"

[system.custom]
d = 1
m = 1
b_s = 1.0
eta_mn = 1.0
b_low = 1.0
gjl = [["exp(-2*t)"]]
alpha = [["1"]]
zeta = [["0"]]
alpha_inf = [[1.0]]
zeta_inf = [[0.0]]
xj = [ [["0"]] ]

[target]
kind = "random"
band = 1
"""

KASNER_CONFIG = """
[run]
seed = 11
tol = 1e-10

[system]
kind = "kasner"

[system.kasner]
u = 2.0
tau_end = 12.0

[initial]
kind = "random"
band = 1
decay = 3.0

[geodesics]
count = 4
c_min = 0.3
c_max = 2.0
include_comoving = true
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


@pytest.fixture()
def runner():
    return CliRunner()


class TestConfigValidation:
    def test_malformed_toml(self, tmp_path, runner):
        cfg = write(tmp_path, "bad.toml", "run = [unclosed")
        result = runner.invoke(main, ["check", "--config", cfg])
        assert result.exit_code == 1

    def test_unknown_key_rejected(self, tmp_path, runner):
        cfg = write(tmp_path, "bad.toml", EXAMPLE_CONFIG + "\n[run2]\nx = 1\n")
        result = runner.invoke(main, ["check", "--config", cfg])
        assert result.exit_code == 1
        assert "unknown config key" in result.output

    def test_missing_file(self, runner):
        result = runner.invoke(main, ["check", "--config", "/nonexistent.toml"])
        assert result.exit_code == 1


class TestCheck:
    def test_example_passes(self, tmp_path, runner):
        cfg = write(tmp_path, "cfg.toml", EXAMPLE_CONFIG)
        out = tmp_path / "out"
        result = runner.invoke(main, ["check", "--config", cfg, "--out", str(out)])
        assert result.exit_code == 0, result.output
        lines = (out / "conditions.csv").read_text().splitlines()
        assert lines[0].startswith("# config_sha256=")
        assert lines[1] == "condition,passed,value"

    def test_anti_silent_fails(self, tmp_path, runner):
        cfg = write(tmp_path, "cfg.toml", ANTI_SILENT_CONFIG)
        result = runner.invoke(main, ["check", "--config", cfg,
                                      "--out", str(tmp_path / "o")])
        assert result.exit_code == 2


class TestSolve:
    def test_outputs_and_determinism(self, tmp_path, runner):
        cfg = write(tmp_path, "cfg.toml", EXAMPLE_CONFIG)
        out1 = tmp_path / "o1"
        out2 = tmp_path / "o2"
        r1 = runner.invoke(main, ["solve", "--config", cfg, "--out", str(out1)])
        assert r1.exit_code == 0, r1.output
        r2 = runner.invoke(main, ["solve", "--config", cfg, "--out", str(out2)])
        assert r2.exit_code == 0
        for name in ("modes.csv", "data_order_1.csv", "data_order_2.csv",
                     "data_aggregate.csv", "residual_slopes.csv"):
            a = (out1 / name).read_bytes()
            b = (out2 / name).read_bytes()
            assert a == b, f"{name} not reproducible"

    def test_slopes_reported(self, tmp_path, runner):
        cfg = write(tmp_path, "cfg.toml", EXAMPLE_CONFIG)
        out = tmp_path / "o"
        result = runner.invoke(main, ["solve", "--config", cfg, "--out", str(out)])
        assert result.exit_code == 0
        rows = (out / "residual_slopes.csv").read_text().splitlines()[2:]
        slopes = {int(r.split(",")[0]): float(r.split(",")[2]) for r in rows}
        assert -1.05 <= slopes[1] <= -0.85
        assert -2.2 <= slopes[2] <= -1.6

    def test_zero_data_floor(self, tmp_path, runner):
        cfg_text = EXAMPLE_CONFIG.replace('kind = "preset-sin"',
                                          'kind = "modes"')
        cfg = write(tmp_path, "cfg.toml", cfg_text)
        out = tmp_path / "o"
        result = runner.invoke(main, ["solve", "--config", cfg, "--out", str(out)])
        assert result.exit_code == 0, result.output
        rows = (out / "residual_slopes.csv").read_text().splitlines()[2:]
        assert all(r.split(",")[1] == "floor" for r in rows)


class TestSpecify:
    def test_free_system_round_trip(self, tmp_path, runner):
        cfg = write(tmp_path, "cfg.toml", FREE_CONFIG)
        out = tmp_path / "o"
        result = runner.invoke(main, ["specify", "--config", cfg,
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert (out / "initial_u0.csv").exists()
        assert (out / "roundtrip.csv").exists()
        assert "max round-trip error" in result.output

    def test_forced_correction(self, tmp_path, runner):
        forced = FREE_CONFIG + """
[[system.custom.forcing]]
n = [1]
re = ["exp(-2*t)"]
"""
        cfg = write(tmp_path, "cfg.toml", forced)
        out = tmp_path / "o"
        result = runner.invoke(main, ["specify", "--config", cfg,
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "forced correction data norm" in result.output


class TestKasnerCommand:
    def test_file_input_constraint_policy(self, tmp_path, runner):
        import numpy as np
        from wavetails.fourier import field_to_csv
        from wavetails.kasner import hermitian_random_field

        rng = np.random.default_rng(11)
        u0 = hermitian_random_field(rng, 4, 1, decay=3.0)
        u1 = hermitian_random_field(rng, 4, 1, decay=3.0)
        field_to_csv(u0, tmp_path / "u0.csv")
        field_to_csv(u1, tmp_path / "u1.csv")
        cfg_text = KASNER_CONFIG.replace(
            'kind = "random"\nband = 1\ndecay = 3.0',
            f'kind = "file"\nu0_path = "{tmp_path / "u0.csv"}"\n'
            f'u1_path = "{tmp_path / "u1.csv"}"')
        cfg = write(tmp_path, "cfg.toml", cfg_text)
        refused = runner.invoke(main, ["kasner", "--config", cfg,
                                       "--out", str(tmp_path / "o1")])
        assert refused.exit_code == 2
        assert "--project-constraints" in refused.output
        projected = runner.invoke(main, ["kasner", "--config", cfg,
                                         "--project-constraints",
                                         "--out", str(tmp_path / "o2")])
        assert projected.exit_code == 0, projected.output

    def test_pipeline(self, tmp_path, runner):
        cfg = write(tmp_path, "cfg.toml", KASNER_CONFIG)
        out = tmp_path / "o"
        result = runner.invoke(main, ["kasner", "--config", cfg,
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        energy = (out / "energy.csv").read_text().splitlines()
        assert energy[1].startswith("class,c1,c2,c3,slope")
        rows = [r.split(",") for r in energy[2:]]
        classes = {r[0] for r in rows}
        assert classes == {"generic", "comoving"}
        # the comoving observer falls to the subleading branch
        comoving = [r for r in rows if r[0] == "comoving"][0]
        assert float(comoving[5]) == pytest.approx(-2.0 * (3 / 7 + 6 / 7),
                                                   rel=1e-12)
        assert (out / "constraints.csv").exists()
        assert (out / "endpoints.csv").exists()


DEFECTIVE_CONFIG = """
[run]
seed = 5
tol = 1e-10
n_max = 1
orders = 1
horizon = 16.0
t_end = 14.0
fit_window = [6.0, 12.0]

[system]
kind = "custom"

[system.custom]
d = 1
m = 1
b_s = 1.0
eta_mn = 1.0
gjl = [["exp(-2*t)"]]
alpha = [["2"]]
zeta = [["1"]]
alpha_inf = [[2.0]]
zeta_inf = [[1.0]]
xj = [ [["0"]] ]

[[system.custom.jordan]]
eigenvalue_re = -1.0
vectors_re = [[1.0, -1.0], [1.0, 0.0]]

[initial]
kind = "modes"
u0 = [{ n = [1], component = 0, re = 1.0 }]
"""


class TestJordanOverride:
    def test_defective_system_needs_override(self, tmp_path, runner):
        # without the jordan block the limit matrix is rejected as defective
        broken = "\n".join(
            line for line in DEFECTIVE_CONFIG.splitlines()
            if not (line.startswith("[[system.custom.jordan")
                    or line.startswith("eigenvalue_re")
                    or line.startswith("vectors_re")))
        cfg = write(tmp_path, "cfg.toml", broken)
        result = runner.invoke(main, ["solve", "--config", cfg,
                                      "--out", str(tmp_path / "o")])
        assert result.exit_code == 3
        assert "Jordan structure" in result.output

    def test_solve_with_override(self, tmp_path, runner):
        cfg = write(tmp_path, "cfg.toml", DEFECTIVE_CONFIG)
        out = tmp_path / "o"
        result = runner.invoke(main, ["solve", "--config", cfg,
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        rows = (out / "residual_slopes.csv").read_text().splitlines()[2:]
        # the remainder here is -g^2 = -e^{-2t} alone, so the first-order
        # residual decays at least like e^{-2 t} (and in fact faster, since
        # the flow adds another e^{-t} on top of the driving term)
        slope = float(rows[0].split(",")[2])
        assert slope <= -1.85


class TestAccept:
    def test_subset(self, tmp_path, runner):
        result = runner.invoke(main, ["accept", "--criteria", "4,5",
                                      "--out", str(tmp_path / "o")])
        assert result.exit_code == 0, result.output
        assert "[PASS] criterion 4" in result.output
        assert "[PASS] criterion 5" in result.output

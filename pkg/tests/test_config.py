import pytest

from eulerlab.config import ConfigError, parse_config, parse_config_text, parse_pressure, parse_profile

MINIMAL = """
[gas]
gamma = 1.4
[grid]
x_min = 0
x_max = 1
n = 32
[init]
kind = profiles
tau = 1.0
u = sine amplitude=-0.5
[solver]
T = 0.5
"""


def test_minimal_config_defaults():
    cfg = parse_config_text(MINIMAL)
    assert cfg["gas"] == {"gamma": 1.4, "K": 1.0, "c_v": 1.0}
    assert cfg["grid"]["boundary"] == "periodic"
    assert cfg["solver"]["cfl"] == 0.5
    assert cfg.sweep_points() == [{}]


@pytest.mark.parametrize(
    "old,new,needle",
    [
        ("gamma = 1.4", "gamma = 0.9", "gas.gamma"),
        ("T = 0.5", "T = 0.5\ncflx = 0.3", "solver.cflx"),
        ("[solver]", "[solvr]", "[solvr]"),
        ("n = 32", "n = 4", "grid.n"),
        ("x_max = 1", "x_max = -1", "grid.x_max"),
        ("u = sine amplitude=-0.5", "u = wiggle amplitude=1", "init.u"),
        ("tau = 1.0\n", "", "init.tau"),
        ("T = 0.5", "T = 0.5\nblowup_factor = 2", "solver.blowup_factor"),
        ("gamma = 1.4\n", "", "gas.gamma"),
    ],
)
def test_errors_name_the_key(old, new, needle):
    with pytest.raises(ConfigError, match=None) as exc:
        parse_config_text(MINIMAL.replace(old, new), "case.ini")
    assert needle in str(exc.value)
    assert "case.ini" in str(exc.value)


def test_error_reports_line_number():
    with pytest.raises(ConfigError) as exc:
        parse_config_text(MINIMAL.replace("gamma = 1.4", "gamma = 0.9"), "case.ini")
    assert "case.ini:3" in str(exc.value)


def test_local_mode_needs_window():
    with pytest.raises(ConfigError, match="alpha"):
        parse_config_text(MINIMAL + "[analysis]\nmode = local\n")
    with pytest.raises(ConfigError, match="beta"):
        parse_config_text(MINIMAL + "[analysis]\nalpha = 0.5\nbeta = 0.2\n")


def test_sweep_points_and_overrides():
    cfg = parse_config_text(MINIMAL + "[sweep]\ngas.gamma = 1.4, 2.0\ngrid.n = 32, 64, 128\n")
    pts = cfg.sweep_points()
    assert len(pts) == 6 and pts[0] == {"gas.gamma": "1.4", "grid.n": "32"}
    sub = cfg.with_values(pts[-1])
    assert sub["gas"]["gamma"] == 2.0 and sub["grid"]["n"] == 128 and not sub.sweep
    assert cfg["grid"]["n"] == 32


@pytest.mark.parametrize("sweep", ["gamma = 1, 2", "gas.gama = 1.4", "gas.gamma = 1.4, 0.5"])
def test_bad_sweep(sweep):
    with pytest.raises(ConfigError):
        parse_config_text(MINIMAL + "[sweep]\n" + sweep + "\n")


def test_profiles_and_pressure():
    assert parse_profile("2.5")(0.0) == 2.5
    assert parse_profile("sine amplitude=2 wavenumber=3")(0.5) == pytest.approx(2 * __import__("math").sin(1.5))
    with pytest.raises(ValueError):
        parse_profile("sine amp=2")
    with pytest.raises(ValueError):
        parse_profile("sine 2")
    assert parse_pressure("1:2, 0.5:1") == [(1.0, 2.0), (0.5, 1.0)]
    for bad in ("", "1", "-1:2", "1:0"):
        with pytest.raises(ValueError):
            parse_pressure(bad)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config(tmp_path / "nope.ini")

import math

import pytest

from phasedistill.config import ConfigError, parse_angle, parse_text
from phasedistill.runner import grid_points, list_presets, load_preset


@pytest.mark.parametrize("text,value", [
    ("pi/2", math.pi / 2), ("3*pi/4", 0.75 * math.pi), ("0.25pi", 0.25 * math.pi),
    ("-pi", -math.pi), ("pi", math.pi), ("0.3", 0.3), (1, 1.0),
])
def test_parse_angle(text, value):
    assert parse_angle(text) == pytest.approx(value, abs=1e-15)


def test_parse_angle_rejects_junk():
    assert parse_angle("Randomized") == "randomized"
    for bad in ("tau", "pi/", True, "2pi/x"):
        with pytest.raises(ValueError):
            parse_angle(bad)


def test_defaults_and_header():
    cfg = parse_text("mode: iterate\nsigma: 0.5\n")
    assert cfg["window"] == 0.45 and cfg["eta"] == 0.85 and cfg["cutoff"] == 40
    lines = cfg.header_lines()
    assert "sigma = 0.5" in lines
    assert "eta = 0.85  (default)" in lines
    assert parse_text("mode: collective\n")["window"] == 0.0


def test_errors_carry_key_and_line():
    with pytest.raises(ConfigError) as err:
        parse_text("mode: iterate\nsigma: 0.5\neta: 1.7\n")
    assert err.value.key == "eta" and err.value.line == 3
    assert "line 3: eta:" in str(err.value)
    with pytest.raises(ConfigError) as err:
        parse_text("mode: iterate\nbogus: 1\n")
    assert err.value.key == "bogus" and err.value.line == 2


@pytest.mark.parametrize("text", [
    "sigma: 0.5\n",
    "mode: iterate\nVx: 0.1\nVp: 1.0\n",
    "mode: iterate\nwindow: 0\n",
    "mode: collective\nwindow: 0.3\n",
    "mode: collective\nN: 3\nstrategy: '0'\n",
    "mode: collective\ntheta: randomized\n",
    "mode: collective\nscheme: custom\n",
    "mode: collective\nscheme: custom\ntransmittances: [0.5]\nN: 3\n",
    "mode: iterate\niterations: 20\n",
    "mode: iterate\nsigma: [0.1, -0.2]\n",
    "mode: iterate\nsigma_range: [1.0, 0.0, 0.1]\n",
    "mode: asymptotic\nr_schedule: [6, 6]\n",
    "mode: iterate\nnodes: 4\n",
    "mode: iterate\ncutoff: 2.5\n",
    "mode: [iterate\n",
    "- a\n- b\n",
])
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        parse_text(text)


def test_overrides_win_over_file():
    cfg = parse_text("mode: iterate\nsigma: 0.5\n", overrides={"sigma": 0.7})
    assert cfg["sigma"] == 0.7 and "sigma" in cfg.explicit


def test_ranges_and_grid():
    cfg = parse_text("mode: asymptotic\nsigma_range: [0.0, 0.4, 0.2]\n"
                     "theta_range: [0, 1.5707963267948966, 3]\n")
    assert cfg["sigma"] == pytest.approx([0.0, 0.2, 0.4])
    assert cfg["theta"] == pytest.approx([0, math.pi / 4, math.pi / 2])
    pts = grid_points(cfg)
    assert len(pts) == 9
    assert list(pts[0]) == ["Vx", "Vp", "eta", "verify_eta", "theta", "sigma"]
    assert [p["sigma"] for p in pts[:3]] == [0.0, 0.2, 0.4]


def test_digest_is_stable_and_sensitive():
    a = parse_text("mode: iterate\nsigma: 0.5\n")
    b = parse_text("sigma: 0.5\nmode: iterate\n")
    c = parse_text("mode: iterate\nsigma: 0.6\n")
    assert a.digest() == b.digest() != c.digest()


def test_all_presets_load():
    names = list_presets()
    assert {"fig2", "fig6", "fig9", "fig10"} <= set(names)
    for n in names:
        cfg = load_preset(n)
        assert cfg.output_name == n
    with pytest.raises(ConfigError):
        load_preset("fig99")

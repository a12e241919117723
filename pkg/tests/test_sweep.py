import copy
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nvmix.oracle import StiffnessError
from nvmix.resonance import LineKind, ResonanceLine, second_larmor_fields
from nvmix.sweep import cli
from nvmix.sweep.antenna import AntennaModel, power_to_amplitude, power_watts
from nvmix.sweep.config import ConfigError, SweepAxis, config_from_dict, load_config
from nvmix.sweep.grid import evaluate_cells, overlay_resonances, resonance_lines, run_map, sample_indices
from nvmix.sweep.io import EmitError, csv_text, fmt, read_csv, write_csv, write_png
from nvmix.sweep.units import UnitError, parse_quantity, parse_value

TWO_PI = 2.0 * math.pi
CONFIGS = Path(__file__).resolve().parents[1] / "configs"

SINGLE = {
    "mode": "single",
    "pairs": [[1, 2]],
    "l_max": 30,
    "axes": {
        "x": {"parameter": "B", "start": "0.07 T", "stop": "0.135 T", "points": 40},
        "y": {"parameter": "P_T", "start": "-30 dBm", "stop": "40 dBm", "points": 12},
    },
    "rates": {"gamma1": "0.5 MHz", "gamma2": "2 MHz"},
    "geometry": {"misalignment": "1 deg", "field_to_current": "0.01 T/A"},
    "transverse": {"frequency": "145 MHz", "calibration": "1 GHz/sqrtW", "inductance": "15.9 nH"},
    "resonances": {"superharmonic": [1, 12], "second_larmor": True},
}

TWO = {
    "mode": "two",
    "pairs": [[1, 3]],
    "l_max": 30,
    "axes": {
        "x": {"parameter": "V_RF", "start": "0 V", "stop": "10 V", "points": 15},
        "y": {"parameter": "I_mag", "start": "0.85 A", "stop": "1.15 A", "points": 11},
    },
    "rates": {"gamma1": "0.5 MHz", "gamma2": "2 MHz"},
    "transverse": {"frequency": "3.15 GHz", "effective_coupling": "5.6 MHz"},
    "longitudinal": {"frequency": "10.5 MHz", "voltage_calibration": "10.5 MHz/V"},
    "resonances": {"two_tone": [-4, 4]},
}


def make(base, **changes):
    raw = copy.deepcopy(base)
    for key, value in changes.items():
        node = raw
        *path, last = key.split("__")
        for p in path:
            node = node.setdefault(p, {})
        if value is None:
            node.pop(last, None)
        else:
            node[last] = value
    return raw


# units


def test_hz_family_converted_to_angular():
    assert parse_value("145 MHz", "rad/s") == pytest.approx(TWO_PI * 145e6, rel=1e-15)
    assert parse_value("2 Mrad/s", "rad/s") == 2e6
    assert parse_value("28.03 GHz/T", "rad/s/T") == pytest.approx(TWO_PI * 28.03e9, rel=1e-15)


@pytest.mark.parametrize(
    "text, dim, value",
    [("1 deg", "rad", math.pi / 180), ("15.9 nH", "H", 15.9e-9), ("74.8 uH", "H", 74.8e-6),
     ("-30 dBm", "dBm", -30.0), ("10 G", "T", 1e-3), ("500 mA", "A", 0.5), ("1e-3 T", "T", 1e-3)],
)
def test_unit_table(text, dim, value):
    q = parse_quantity(text)
    assert q.dimension == dim
    assert q.value == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("text", ["145", "MHz", "1 furlong", "1.2.3 T", "inf T", 145.0, "1e400 T"])
def test_bad_quantities_rejected(text):
    with pytest.raises(UnitError):
        parse_quantity(text)


def test_wrong_dimension_rejected():
    with pytest.raises(UnitError, match="expected T"):
        parse_value("1 A", "T")


# antenna


def test_inductance_from_mismatch():
    rf = AntennaModel.from_mismatch(94.0, TWO_PI * 10e6, calibration=1.0)
    mw = AntennaModel.from_mismatch(6.0, TWO_PI * 3e9, calibration=1.0)
    assert rf.inductance == pytest.approx(74.8e-6, rel=1e-3)
    assert mw.inductance == pytest.approx(15.9e-9, rel=1e-3)
    assert rf.mismatch(TWO_PI * 10e6) == pytest.approx(94.0, rel=1e-14)
    assert mw.mismatch(TWO_PI * 3e9) == pytest.approx(6.0, rel=1e-14)


def test_ten_db_is_sqrt_ten_in_amplitude():
    ant = AntennaModel(15.9e-9, TWO_PI * 1e9)
    ratio = power_to_amplitude(20.0, ant) / power_to_amplitude(10.0, ant)
    assert ratio == pytest.approx(math.sqrt(10.0), rel=1e-14)


def test_zero_dbm_amplitude():
    c = 123.0
    assert power_to_amplitude(0.0, AntennaModel(1e-9, c)) == pytest.approx(c * math.sqrt(1e-3), rel=1e-15)
    assert power_watts(30.0) == pytest.approx(1.0, rel=1e-15)


@given(st.floats(-100, 60), st.floats(0.001, 30))
def test_power_to_amplitude_strictly_monotone(p, dp):
    ant = AntennaModel(1e-9, 1e6)
    assert power_to_amplitude(p + dp, ant) > power_to_amplitude(p, ant)


@pytest.mark.parametrize("kw", [dict(inductance=0.0, calibration=1.0), dict(inductance=1e-9, calibration=0.0),
                                dict(inductance=1e-9, calibration=1.0, Z0=-50.0)])
def test_antenna_validation(kw):
    with pytest.raises(ValueError):
        AntennaModel(**kw)


# config


def test_shipped_configs_load():
    for name in ("fig3", "fig4", "fig5"):
        cfg = load_config(CONFIGS / f"{name}.toml")
        assert cfg.x_axis.points >= 2 and cfg.y_axis.points >= 2


def test_fig3_config_values():
    cfg = load_config(CONFIGS / "fig3.toml")
    assert cfg.transverse.frequency == pytest.approx(TWO_PI * 145e6)
    assert cfg.rates.gamma1 == pytest.approx(TWO_PI * 0.5e6)
    assert cfg.rates.gamma2 == pytest.approx(TWO_PI * 2e6)
    assert (cfg.x_axis.points, cfg.y_axis.points) == (400, 200)
    assert cfg.geometry.misalignment_alpha == pytest.approx(math.radians(1.0))


def test_static_current_uses_coil_calibration():
    raw = make(TWO, axes__y={"parameter": "A_L", "start": "0 MHz", "stop": "1 MHz", "points": 2},
               axes__x={"parameter": "A_T", "start": "0 MHz", "stop": "1 MHz", "points": 2},
               static={"current": "1.02 A"}, geometry={"field_to_current": "0.1 T/A"},
               transverse__effective_coupling=None)
    assert config_from_dict(raw).static_field == pytest.approx(0.102)


@pytest.mark.parametrize(
    "changes, match",
    [
        (dict(axes__x__points=1), "at least 2"),
        (dict(axes__x__parameter="Q"), "parameter"),
        (dict(axes__x__start="1 A"), "dimension"),
        (dict(axes__y={"parameter": "B", "start": "0.1 T", "stop": "0.2 T", "points": 3}), "different"),
        (dict(mode="three"), "mode"),
        (dict(pairs=[[2, 1]]), "pair"),
        (dict(rates__gamma2=None), "gamma2"),
        (dict(rates__gamma2_convention="half"), "convention"),
        (dict(transverse__inductance=None), "needs inductance or mismatch"),
        (dict(transverse__power="1 dBm"), "both"),
        (dict(static={"field": "0.1 T"}), "both as an axis"),
        (dict(sideband=50), "exceeds"),
        (dict(l_max=-1), "l_max"),
        (dict(resonances__superharmonic=[5, 1]), "reversed"),
        (dict(transverse=None), "transverse"),
        (dict(axes__x__points=2.5), "integer"),
    ],
)
def test_config_errors(changes, match):
    with pytest.raises(ConfigError, match=match):
        config_from_dict(make(SINGLE, **changes))


def test_longitudinal_axis_needs_two_mode():
    raw = make(TWO, mode="single")
    with pytest.raises(ConfigError, match="mode = 'two'"):
        config_from_dict(raw)


def test_non_finite_axis_rejected():
    with pytest.raises(ConfigError):
        SweepAxis("B", 0.0, math.inf, 3)


def test_config_file_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("mode = [unterminated\n")
    with pytest.raises(ConfigError):
        load_config(bad)


# map evaluation


def test_map_shape_and_finite():
    cfg = config_from_dict(SINGLE)
    grid = run_map(cfg, threads=1)
    assert grid.P.shape == grid.ratio.shape == grid.l_star.shape == (12, 40)
    assert np.all(np.isfinite(grid.P))
    assert np.all((grid.P >= 0) & (grid.P < 1))
    assert not np.isnan(grid.ratio).any()
    assert np.all(grid.ratio >= 1.0)


def test_thread_count_does_not_change_result():
    cfg = config_from_dict(make(SINGLE, axes__x__points=90))
    a = run_map(cfg, threads=1)
    b = run_map(cfg, threads=5)
    assert csv_text(a) == csv_text(b)


@pytest.mark.parametrize("base", [SINGLE, TWO])
def test_sub_rectangle_matches_full_run(base):
    cfg = config_from_dict(base)
    full = run_map(cfg, threads=3)
    ys, xs = np.meshgrid(np.arange(2, 7), np.arange(3, 9), indexing="ij")
    p, ratio, ls, _, _ = evaluate_cells(cfg, ys.ravel(), xs.ravel())
    np.testing.assert_array_equal(p.reshape(ys.shape), full.P[2:7, 3:9])
    np.testing.assert_array_equal(ratio.reshape(ys.shape), full.ratio[2:7, 3:9])
    np.testing.assert_array_equal(ls.reshape(ys.shape), full.l_star[2:7, 3:9])


def test_two_pair_map_sub_rectangle():
    cfg = config_from_dict(load_fig5_small())
    full = run_map(cfg, threads=2)
    assert set(np.unique(full.pair_star)) <= {0, 1}
    iy, ix = np.array([0, 3, 5]), np.array([7, 1, 19])
    p, ratio, ls, k, _ = evaluate_cells(cfg, iy, ix)
    np.testing.assert_array_equal(p, full.P[iy, ix])
    np.testing.assert_array_equal(k, full.pair_star[iy, ix])


def load_fig5_small():
    import sys

    if sys.version_info >= (3, 11):
        import tomllib
    else:
        import tomli as tomllib
    raw = tomllib.loads((CONFIGS / "fig5.toml").read_text())
    raw["axes"]["x"]["points"] = 20
    raw["axes"]["y"]["points"] = 6
    raw.pop("output", None)
    return raw


def test_zero_drive_gives_zero_grid():
    raw = make(TWO, axes__x={"parameter": "B", "start": "0.09 T", "stop": "0.11 T", "points": 25},
               axes__y={"parameter": "A_L", "start": "0 MHz", "stop": "50 MHz", "points": 6},
               transverse={"frequency": "3.15 GHz", "amplitude": "0 MHz"},
               longitudinal={"frequency": "10.5 MHz"})
    grid = run_map(config_from_dict(raw))
    assert np.all(grid.P == 0.0)
    assert np.all(grid.ratio == 1.0)


def test_power_axis_monotone_without_sidebands():
    # no longitudinal modulation, so only the l = 0 term carries weight
    raw = make(TWO, axes__x={"parameter": "B", "start": "0.0085 T", "stop": "0.0115 T", "points": 30},
               axes__y={"parameter": "P_T", "start": "-40 dBm", "stop": "30 dBm", "points": 60},
               transverse={"frequency": "3.15 GHz", "calibration": "10 MHz/sqrtW", "mismatch": 6.0},
               longitudinal={"frequency": "10.5 MHz", "amplitude": "0 MHz"})
    grid = run_map(config_from_dict(raw))
    assert np.all(grid.l_star == 0)
    assert np.all(np.diff(grid.P, axis=0) >= 0.0)
    assert np.any(grid.P[-1] > 0.1)


@given(st.floats(0.0, 60.0))
def test_fixed_l0_power_monotone_property(p_dbm):
    raw = make(TWO, axes__x={"parameter": "B", "start": "0.0085 T", "stop": "0.0115 T", "points": 5},
               axes__y={"parameter": "P_T", "start": f"{p_dbm - 20.0} dBm", "stop": f"{p_dbm} dBm", "points": 4},
               transverse={"frequency": "3.15 GHz", "calibration": "1 MHz/sqrtW", "mismatch": 6.0},
               longitudinal={"frequency": "10.5 MHz", "amplitude": "0 MHz"}, sideband=0)
    grid = run_map(config_from_dict(raw), threads=1)
    assert np.all(np.diff(grid.P, axis=0) >= 0.0)


def test_sample_indices_deterministic_and_in_range():
    iy, ix = sample_indices(200, 400, 25)
    assert len(iy) == 25
    assert np.all((0 <= iy) & (iy < 200)) and np.all((0 <= ix) & (ix < 400))
    iy2, ix2 = sample_indices(200, 400, 25)
    np.testing.assert_array_equal(iy, iy2)
    np.testing.assert_array_equal(ix, ix2)
    assert len(sample_indices(2, 2, 25)[0]) == 4


# overlays


def test_empty_overlay_is_identity():
    grid = run_map(config_from_dict(make(SINGLE, axes__x__points=4, axes__y__points=3)))
    assert overlay_resonances(grid, []) is grid


def test_second_larmor_lines_are_distinct_kind():
    cfg = config_from_dict(make(SINGLE, axes__x__points=4, axes__y__points=3))
    grid = overlay_resonances(run_map(cfg), resonance_lines(cfg))
    kinds = {ov.kind for ov in grid.overlays}
    assert kinds == {"superharmonic", "second_larmor"}
    sl = [ov.coordinate for ov in grid.overlays if ov.kind == "second_larmor"]
    expected = [r.B for r in second_larmor_fields(cfg.transverse.frequency, cfg.geometry, (0.07, 0.135))]
    assert sorted(sl) == pytest.approx(sorted(expected), abs=1e-12)
    assert all(ov.axis == "x" for ov in grid.overlays)


def test_current_axis_overlay_scaled():
    cfg = config_from_dict(make(TWO, axes__x__points=3, axes__y__points=3))
    lines = resonance_lines(cfg)
    grid = overlay_resonances(run_map(cfg), lines, cfg.geometry.field_to_current)
    assert grid.overlays
    for ov in grid.overlays:
        assert ov.axis == "y"
        assert 0.85 <= ov.coordinate <= 1.15
    coords = sorted(ov.coordinate for ov in grid.overlays)
    in_range = sorted(r.B / 0.01 for r in lines if 0.85 <= r.B / 0.01 <= 1.15)
    assert coords == pytest.approx(in_range, rel=1e-14)


def test_overlay_rejects_axes_without_field():
    raw = make(TWO, axes__x={"parameter": "A_T", "start": "0 MHz", "stop": "1 MHz", "points": 2},
               axes__y={"parameter": "A_L", "start": "0 MHz", "stop": "1 MHz", "points": 2},
               static={"field": "0.1 T"}, transverse={"frequency": "3.15 GHz"})
    grid = run_map(config_from_dict(raw))
    line = ResonanceLine(LineKind.TWO_TONE, 0, 0.1, 0.0)
    with pytest.raises(ValueError, match="tesla"):
        overlay_resonances(grid, [line])


def test_overlay_current_axis_needs_calibration():
    grid = run_map(config_from_dict(make(TWO, axes__x__points=2, axes__y__points=2)))
    with pytest.raises(ValueError, match="field_to_current"):
        overlay_resonances(grid, [ResonanceLine(LineKind.TWO_TONE, 0, 0.1, 0.0)])


# output


def tiny_grid():
    cfg = config_from_dict(make(SINGLE, axes__x__points=2, axes__y__points=2))
    return overlay_resonances(run_map(cfg), resonance_lines(cfg))


def test_two_by_two_csv_layout():
    text = csv_text(tiny_grid())
    lines = text.splitlines()
    assert lines[0].startswith("# axis x B T ")
    assert lines[1].startswith("# axis y P_T dBm ")
    header = lines.index("x,y,P,dominance_ratio,l_star")
    assert all(line.startswith("#") for line in lines[:header])
    assert len(lines) - header - 1 == 4
    rows = [line.split(",") for line in lines[header + 1:]]
    # row-major: x varies fastest
    assert rows[0][1] == rows[1][1] and rows[0][0] != rows[1][0]


def test_fmt_significant_digits():
    assert fmt(0.123456789123) == "0.123456789"
    assert fmt(1234567891234.0) == "1234567890000"
    assert fmt(-0.5) == "-0.5"
    assert fmt(math.inf) == "inf"


def test_csv_round_trip(tmp_path):
    grid = tiny_grid()
    path = tmp_path / "g.csv"
    write_csv(grid, path)
    back = read_csv(path)
    expected_p = np.array([[float(fmt(v)) for v in row] for row in grid.P])
    expected_r = np.array([[float(fmt(v)) for v in row] for row in grid.ratio])
    np.testing.assert_array_equal(back.P, expected_p)
    np.testing.assert_array_equal(back.ratio, expected_r)
    np.testing.assert_array_equal(back.l_star, grid.l_star)
    assert back.x_axis == grid.x_axis and back.y_axis == grid.y_axis
    assert len(back.overlays) == len(grid.overlays)
    assert csv_text(back) == path.read_text()


def test_write_errors_carry_path(tmp_path):
    target = tmp_path / "no" / "such" / "dir" / "out.csv"
    with pytest.raises(EmitError, match="out.csv"):
        write_csv(tiny_grid(), target)


def test_png_written(tmp_path):
    path = tmp_path / "map.png"
    write_png(tiny_grid(), path, title="t")
    assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


# command line


def write_config(tmp_path, raw_text):
    path = tmp_path / "c.toml"
    path.write_text(raw_text)
    return path


SMALL_TOML = (CONFIGS / "fig3.toml").read_text().replace("points = 400", "points = 30").replace(
    "points = 200", "points = 8"
)


def test_cli_map_success(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL_TOML)
    out = tmp_path / "m.csv"
    png = tmp_path / "m.png"
    code = cli.main(["map", "--config", str(cfg), "--out-csv", str(out), "--out-png", str(png), "--threads", "2"])
    assert code == 0
    assert out.exists() and png.exists()
    assert "# overlay superharmonic" in out.read_text()
    assert "flagged cells 0" in capsys.readouterr().out


def test_cli_map_is_byte_stable(tmp_path):
    cfg = write_config(tmp_path, SMALL_TOML)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["map", "--config", str(cfg), "--out-csv", str(a)]) == 0
    assert cli.main(["map", "--config", str(cfg), "--out-csv", str(b), "--threads", "1"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_cli_l_max_override(tmp_path):
    cfg = write_config(tmp_path, SMALL_TOML)
    out = tmp_path / "m.csv"
    assert cli.main(["map", "--config", str(cfg), "--out-csv", str(out), "--l-max", "0"]) == 0
    assert set(read_csv(out).l_star.ravel()) == {0}
    assert cli.main(["map", "--config", str(cfg), "--out-csv", str(out), "--l-max", "-2"]) == 2


def test_cli_config_error_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL_TOML.replace('"145 MHz"', '"145 furlongs"'))
    assert cli.main(["map", "--config", str(cfg), "--out-csv", str(tmp_path / "x.csv")]) == 2
    assert "config error" in capsys.readouterr().err
    assert cli.main(["map", "--config", str(tmp_path / "nope.toml"), "--out-csv", "x.csv"]) == 2
    assert cli.main(["levels", "--bmin", "0", "--bmax", "0.2", "--points", "1"]) == 2


def test_cli_missing_output_is_config_error(tmp_path):
    cfg = write_config(tmp_path, SMALL_TOML)
    assert cli.main(["map", "--config", str(cfg)]) == 2


def test_cli_io_error_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL_TOML)
    bad = tmp_path / "missing_dir" / "m.csv"
    assert cli.main(["map", "--config", str(cfg), "--out-csv", str(bad)]) == 4
    assert "m.csv" in capsys.readouterr().err


def test_cli_numerical_failure_exit_code(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise StiffnessError("step size underflow")

    monkeypatch.setattr(cli, "run_map", boom)
    cfg = write_config(tmp_path, SMALL_TOML)
    assert cli.main(["map", "--config", str(cfg), "--out-csv", str(tmp_path / "m.csv")]) == 3


def test_cli_oracle_flag_reports(tmp_path, capsys):
    text = SMALL_TOML.replace("samples = 25", "samples = 2")
    cfg = write_config(tmp_path, text)
    assert cli.main(["map", "--config", str(cfg), "--out-csv", str(tmp_path / "m.csv"), "--oracle"]) == 0
    out = capsys.readouterr().out
    assert out.count("oracle cell") == 2
    assert "max rel deviation" in out


def test_cli_resonances(capsys):
    assert cli.main(["resonances", "--config", str(CONFIGS / "fig3.toml")]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "kind,l,B_T,I_A,residual_rad_s"
    kinds = [row.split(",")[0] for row in lines[1:]]
    assert kinds.count("second_larmor") == 2
    assert kinds.count("superharmonic") >= 10


def test_cli_levels(capsys):
    assert cli.main(["levels", "--bmin", "0", "--bmax", "0.2", "--points", "5", "--alpha-deg", "0"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "B_T,E1_GHz,E2_GHz,E3_GHz"
    assert len(lines) == 6
    # zero field: levels at 0 and twice at omega_D (shifted frame), sorted ascending
    e = [float(v) for v in lines[1].split(",")[1:]]
    assert e == sorted(e)
    assert e[2] - e[0] == pytest.approx(2.87, abs=1e-9)

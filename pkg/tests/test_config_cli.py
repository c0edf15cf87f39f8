import json
from pathlib import Path

import pytest

from phononlab import cli
from phononlab.config import apply_overrides, default_config_path, load_config
from phononlab.device import ConfigError


def test_default_config_values(config):
    assert config.device.node_a.g_ge == pytest.approx(5.9e6)
    assert config.device.node_b.g_ge == pytest.approx(7.1e6)
    assert config.device.g_qubit_qubit == pytest.approx(8.6e6)
    assert config.device.node_a.f_resonator == pytest.approx(3.027e9)
    assert config.pulses.coupler_rise == pytest.approx(1e-9)
    assert set(config.saw) == {"a", "b", "multimode"}


def test_negative_t1_rejected(config):
    with pytest.raises(ConfigError, match="must be > 0"):
        apply_overrides(config, {"node_a.qubit_t1_us": "-5.0"})


def test_t2_bound_enforced(config):
    with pytest.raises(ConfigError, match="T2"):
        apply_overrides(config, {"node_a.qubit_t2_ramsey_us": "100.0"})


def test_missing_coupling_key_named(tmp_path):
    src = default_config_path().read_text()
    src = src.replace("qubit_qubit_mhz = 8.6", "")
    path = tmp_path / "bad.toml"
    path.write_text(src)
    with pytest.raises(ConfigError, match="qubit_qubit_mhz"):
        load_config(path)


def test_unknown_key_rejected(tmp_path):
    src = default_config_path().read_text()
    src = src.replace("[coupling]", "[coupling]\nmystery_knob = 1.0")
    path = tmp_path / "bad.toml"
    path.write_text(src)
    with pytest.raises(ConfigError, match="mystery_knob"):
        load_config(path)


def test_unknown_section_rejected(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text(default_config_path().read_text() + "\n[surprise]\nx = 1\n")
    with pytest.raises(ConfigError, match="surprise"):
        load_config(path)


def test_parse_error_reported(tmp_path):
    path = tmp_path / "broken.toml"
    path.write_text("[node_a\nqubit_idle_frequency_ghz = 3.2\n")
    with pytest.raises(ConfigError, match="cannot parse"):
        load_config(path)


def test_missing_file_reported():
    with pytest.raises(ConfigError, match="not found"):
        load_config("/nonexistent/config.toml")


def test_override_applies(config):
    tweaked = apply_overrides(config, {"node_a.g_ge_mhz": "6.1"})
    assert tweaked.device.node_a.g_ge == pytest.approx(6.1e6)
    assert config.device.node_a.g_ge == pytest.approx(5.9e6)


def test_complex_reflection_parsing(config):
    assert config.saw_design("a").r_idt == pytest.approx(-0.042j)
    assert config.saw_design("b").r_mirror == pytest.approx(-0.0267j)


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_cli_lists_scenarios(capsys):
    assert cli.main(["scenarios"]) == 0
    out = capsys.readouterr().out.split()
    for name in ("bell", "noon", "chevron", "saw-curves", "multimode"):
        assert name in out


def test_cli_default_config_path(capsys):
    assert cli.main(["default-config"]) == 0
    path = Path(capsys.readouterr().out.strip())
    assert path.exists()


def test_cli_saw_curves_run_and_artifacts(tmp_path):
    out = tmp_path / "run1"
    code = cli.main(["run", "saw-curves", "--out", str(out), "--check"])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["scenario"] == "saw-curves"
    assert report["seed"] == 1
    assert all(c["passed"] for c in report["checks"])
    assert (out / "saw_a.csv").exists()
    header = (out / "saw_a.csv").read_text().splitlines()[0]
    assert header == "f_hz,s21,gamma_mag,re_y_idt"


def test_cli_run_is_byte_deterministic(tmp_path):
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        assert cli.main(["run", "multimode", "--out", str(out),
                         "--seed", "7"]) == 0
        outs.append(out)
    files1 = sorted(p.name for p in outs[0].iterdir())
    files2 = sorted(p.name for p in outs[1].iterdir())
    assert files1 == files2
    for name in files1:
        b1 = (outs[0] / name).read_bytes()
        b2 = (outs[1] / name).read_bytes()
        if name == "report.json":
            d1 = json.loads(b1)
            d2 = json.loads(b2)
            d1.pop("wall_clock_s")
            d2.pop("wall_clock_s")
            assert d1 == d2
        else:
            assert b1 == b2, f"{name} differs between identical runs"


def test_cli_bad_override_exits_with_error(tmp_path, capsys):
    code = cli.main(["run", "saw-curves", "--out", str(tmp_path / "x"),
                     "--set", "nonsense"])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_cli_unknown_scenario_rejected():
    with pytest.raises(SystemExit):
        cli.main(["run", "not-a-scenario"])


def test_cli_override_roundtrip(tmp_path):
    out = tmp_path / "ovr"
    code = cli.main(["run", "multimode", "--out", str(out),
                     "--set", "saw_multimode.mirror_lines=150"])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["config"]["saw_multimode"]["mirror_lines"] == 150

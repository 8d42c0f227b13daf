import json

import pytest

from hybridq.cli import build_parser, load_run_config, main, parse_config, preset, serialize_config
from hybridq.core.enums import FrameEnum, PropagatorMethodEnum, RunModeEnum
from hybridq.core.errors import ConfigError
from hybridq.model import drive_for_r
from hybridq.models import RunConfig

MINIMAL = """\
mode=semiclassical
delta_c=70000
omega_coll=40
delta_width=60
n_spins=10000
"""


def test_minimal_document_is_valid():
    config = parse_config(MINIMAL)
    assert config.mode is RunModeEnum.SEMICLASSICAL
    assert config.params.delta_c == 70000
    assert config.params.eta == 0
    assert config.n_classes == 200
    assert config.horizon == pytest.approx(0.3)
    assert config.resolved_r_values() == [0.0]


def test_comments_quotes_and_export_prefix():
    config = parse_config(
        "# protection run\n"
        "export mode=quantum\n"
        "delta_c = 70000   # MHz\n"
        "omega_coll='40'\n"
        "delta_width=30\n"
        'frame="squeezed-rwa"\n'
        'r_values="0, 1, 2"\n'
    )
    assert config.mode is RunModeEnum.QUANTUM
    assert config.frame is FrameEnum.SQUEEZED_RWA
    assert config.r_values == [0.0, 1.0, 2.0]


def test_squeezing_key_sets_drive():
    config = parse_config(MINIMAL + "r=1\n")
    assert config.params.eta == pytest.approx(drive_for_r(1.0, 70000.0), rel=1e-15)
    assert config.params.squeezing == pytest.approx(1.0, rel=1e-12)


def test_drive_at_threshold_is_rejected():
    with pytest.raises(ConfigError) as err:
        parse_config(MINIMAL + "eta=70000\n")
    assert "parametric instability threshold" in str(err.value)
    assert err.value.key == "eta"
    assert err.value.line == 6


def test_empty_document_lists_required_keys():
    with pytest.raises(ConfigError) as err:
        parse_config("")
    assert "mode, delta_c, omega_coll, delta_width" in str(err.value)


def test_unknown_key_reports_line():
    with pytest.raises(ConfigError) as err:
        parse_config("mode=semiclassical\ndelta_c=70000\nfoo=1\n")
    assert err.value.key == "foo"
    assert err.value.line == 3


def test_conflicting_drive_and_squeezing():
    with pytest.raises(ConfigError) as err:
        parse_config(MINIMAL + "r=1\neta=1\n")
    assert err.value.key == "r"


def test_mean_field_needs_spin_count():
    with pytest.raises(ConfigError) as err:
        parse_config("mode=sweep\ndelta_c=70000\nomega_coll=40\ndelta_width=60\nr_values=0,1\n")
    assert err.value.key == "n_spins"


def test_bad_values_are_located():
    with pytest.raises(ConfigError) as err:
        parse_config(MINIMAL + "n_classes=2.5\n")
    assert err.value.key == "n_classes"
    with pytest.raises(ConfigError) as err:
        parse_config(MINIMAL + "kappa=-1\n")
    assert err.value.key == "kappa"
    assert err.value.line == 6
    with pytest.raises(ConfigError) as err:
        parse_config(MINIMAL.replace("semiclassical", "classical"))
    assert err.value.key == "mode"


def test_sweep_needs_r_values():
    with pytest.raises(ConfigError) as err:
        parse_config(MINIMAL.replace("semiclassical", "sweep"))
    assert err.value.key == "r_values"


@pytest.mark.parametrize("name", ["fig2a", "fig2b", "fig3-desk"])
def test_presets_survive_serialization(name):
    config = preset(name)
    assert parse_config(serialize_config(config)) == config


def test_custom_document_survives_serialization():
    config = parse_config(
        "mode=wigner\ndelta_c=2.5\nomega_coll=1.25\ndelta_width=0.1\nkappa=0.3\n"
        "eta=1.1\nmean_spin_detuning=2.4\n"
        'initial_state="0:0.6,1:0.8j"\nnote="say \\"hi\\""\n'
        "method=trotter2-truncated\nsvd_cutoff=1e-6\nmax_rank=8\nwigner_time=0.125\n"
    )
    assert config.note == 'say "hi"'
    assert config.propagator.method is PropagatorMethodEnum.TROTTER2_TRUNCATED
    assert config.propagator.max_rank == 8
    assert parse_config(serialize_config(config)) == config


def test_preset_values():
    fig2a = preset("fig2a")
    assert fig2a.params.delta_width == 60
    assert fig2a.params.n_spins == 10000
    assert fig2a.r_values == [0.0, 1.0, 2.0]
    fig2b = preset("fig2b")
    assert fig2b.delta_values == [60.0, 70.0, 80.0]
    assert len(fig2b.r_values) == 7
    desk = preset("fig3-desk")
    assert desk.params.kappa == 7
    assert desk.params.gamma_h == pytest.approx(7 / 8)
    assert desk.params.gamma_p == pytest.approx(7 / 16)
    assert desk.frame is FrameEnum.SQUEEZED_RWA
    assert desk.note


def test_unknown_preset():
    with pytest.raises(ConfigError) as err:
        preset("fig9")
    assert "fig3-desk" in str(err.value)
    with pytest.raises(SystemExit):
        build_parser().parse_args(["quantum", "--preset", "fig9"])


def test_command_line_overrides():
    args = build_parser().parse_args(["sweep", "--preset", "fig2b", "--workers", "3", "--out", "runs/b", "--seed", "5"])
    config = load_run_config(args)
    assert config.workers == 3
    assert config.output_dir == "runs/b"
    assert config.seed == 5
    assert config.mode is RunModeEnum.SWEEP


def test_main_reports_config_errors(tmp_path, capsys):
    doc = tmp_path / "bad.env"
    doc.write_text(MINIMAL + "eta=80000\n", encoding="utf-8")
    assert main(["semiclassical", "--config", str(doc)]) == 2
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["error"] == "ConfigError"
    assert record["exit_code"] == 2
    assert record["key"] == "eta"


def test_main_reports_missing_file(tmp_path, capsys):
    assert main(["quantum", "--config", str(tmp_path / "absent.env")]) == 4
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["error"] == "FileNotFoundError"


def test_main_prints_schema_and_presets(capsys):
    assert main(["presets", "--schema"]) == 0
    out = capsys.readouterr().out
    assert "delta_c" in out and "peak_prominence" in out
    assert main(["presets", "--show", "fig2a"]) == 0
    shown = capsys.readouterr().out
    assert parse_config(shown) == preset("fig2a")


def _last_record(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_main_reports_solver_failures(tmp_path, capsys, monkeypatch):
    def _broken(*args, **kwargs):
        raise ValueError("Values in `t_eval` are not within `t_span`.")

    monkeypatch.setattr("hybridq.semiclassical.solve_ivp", _broken)
    doc = tmp_path / "run.env"
    doc.write_text(MINIMAL + "n_classes=5\nt_end=0.01\n", encoding="utf-8")
    assert main(["semiclassical", "--config", str(doc), "--out", str(tmp_path / "out")]) == 3
    record = _last_record(capsys)
    assert record["error"] == "IntegrationError"
    assert record["exit_code"] == 3


def test_main_maps_stray_numerical_errors(tmp_path, capsys, monkeypatch):
    def _overflow(config, workers=None):
        raise FloatingPointError("overflow encountered in exp")

    monkeypatch.setattr("hybridq.cli.run", _overflow)
    doc = tmp_path / "run.env"
    doc.write_text(MINIMAL, encoding="utf-8")
    assert main(["semiclassical", "--config", str(doc)]) == 3
    record = _last_record(capsys)
    assert record["error"] == "IntegrationError"
    assert "overflow" in record["message"]


def test_main_maps_validation_errors_to_config_errors(tmp_path, capsys, monkeypatch):
    def _invalid(config, workers=None):
        RunConfig.model_validate({**config.model_dump(), "dt_out": -1.0})

    monkeypatch.setattr("hybridq.cli.run", _invalid)
    doc = tmp_path / "run.env"
    doc.write_text(MINIMAL, encoding="utf-8")
    assert main(["semiclassical", "--config", str(doc)]) == 2
    record = _last_record(capsys)
    assert record["error"] == "ConfigError"
    assert record["key"] == "dt_out"

import json

import numpy as np
import pandas as pd
import pytest

from conftest import CONFIGS, doppler_only_config, full_signal_config, write_config
from doptrack import pipeline
from doptrack.config import RunConfig, load_config
from doptrack.errors import ConfigError, StageError
from doptrack.report import read_trajectory, trajectory_frame
from doptrack.scenario import shape_motion
from doptrack.utils import csvio


def test_load_config_resolves_relative_paths(tmp_path):
    cfg = load_config(write_config(tmp_path / "run.json", doppler_only_config("out")))
    assert isinstance(cfg, RunConfig)
    assert cfg.output_dir == tmp_path / "out"
    assert cfg.truth.shape == "L"
    assert cfg.scenario.num_receivers == 3


@pytest.mark.parametrize(
    "name",
    [
        pytest.param("v_shape_doppler.json", id="V doppler-only"),
        pytest.param("l_shape_doppler.json", id="L doppler-only"),
        pytest.param("u_shape_doppler.json", id="U doppler-only"),
        pytest.param("v_shape_full.json", id="V full-signal"),
    ],
)
def test_shipped_configs_load(name):
    cfg = load_config(CONFIGS / name)
    assert cfg.seed == 2024
    assert cfg.truth.num_instants == 400
    assert cfg.solver.start_count >= 100


def test_json_errors_carry_line_and_column(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "seed": 1,\n  "mode": }\n')
    with pytest.raises(ConfigError, match=r"broken\.json:3:\d+:"):
        load_config(path)


@pytest.mark.parametrize(
    "overrides,location",
    [
        pytest.param(
            {"truth": {"shape": "V", "speed": -1.0}}, "truth.speed", id="negative speed"
        ),
        pytest.param({"bogus": 1}, "bogus", id="unknown key"),
        pytest.param({"mode": "radar"}, "mode", id="unknown mode"),
        pytest.param(
            {"solver": {"init_position_region": [5.0, -5.0, -5.0, 5.0]}},
            "solver",
            id="empty start region",
        ),
    ],
)
def test_schema_errors_name_the_field(tmp_path, overrides, location):
    path = write_config(tmp_path / "run.json", doppler_only_config("out", **overrides))
    with pytest.raises(ConfigError, match=location):
        load_config(path)


@pytest.mark.parametrize(
    "truth",
    [
        pytest.param({"shape": "V", "waypoints": [[0, 0], [1, 1]]}, id="two sources"),
        pytest.param({"speed": 2.0}, id="no source"),
    ],
)
def test_truth_needs_exactly_one_source(tmp_path, truth):
    path = write_config(tmp_path / "run.json", doppler_only_config("out", truth=truth))
    with pytest.raises(ConfigError, match="exactly one of shape, waypoints or file"):
        load_config(path)


@pytest.mark.parametrize(
    "overrides,message",
    [
        pytest.param({"truth": {"file": "missing.csv"}}, "truth.file", id="truth file"),
        pytest.param({"signals_dir": "nowhere"}, "signals_dir", id="signals directory"),
    ],
)
def test_missing_paths_are_config_errors(tmp_path, overrides, message):
    path = write_config(tmp_path / "run.json", doppler_only_config("out", **overrides))
    with pytest.raises(ConfigError, match=message):
        load_config(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="nope.json"):
        load_config(tmp_path / "nope.json")


def test_channel_count_must_match_receivers(tmp_path):
    cfg = full_signal_config("out")
    cfg["channels"] = cfg["channels"][:2]
    with pytest.raises(ConfigError, match="2 channels given for 3 receivers"):
        load_config(write_config(tmp_path / "run.json", cfg))


def test_run_wraps_config_errors(tmp_path):
    with pytest.raises(StageError) as info:
        pipeline.run(tmp_path / "nope.json")
    assert info.value.stage == "config"
    assert isinstance(info.value.cause, ConfigError)


def test_noiseless_doppler_only_run(doppler_only_file, tmp_path):
    outcome = pipeline.run(doppler_only_file)

    assert outcome.report.p90 < 0.01
    assert outcome.result.objective < 1e-6
    assert max(outcome.report.doppler_rmse) < 1e-3
    for name in ("trajectory", "truth", "tracks", "report", "summary"):
        assert outcome.files[name].exists()
    assert (tmp_path / "out" / "trajectory.svg").exists()
    assert (tmp_path / "out" / "error_cdf.svg").exists()
    for j in range(3):
        assert outcome.files[f"tracks_rx{j}_svg"].exists()
    assert not (tmp_path / "out" / "caf_rx0.svg").exists()

    summary = json.loads(outcome.files["summary"].read_text())
    assert summary["mode"] == "doppler-only"
    assert summary["seed"] == 7
    assert len(summary["starts"]) == 50
    assert summary["penalty"] == 0.0
    assert all(s["penalty"] == 0.0 for s in summary["starts"])

    report = json.loads(outcome.files["report"].read_text())
    assert report["percentiles"]["p90"] == pytest.approx(outcome.report.p90)
    assert len(report["errors"]) == 20


def test_run_output_dir_override(doppler_only_file, tmp_path):
    outcome = pipeline.run(doppler_only_file, output_dir=tmp_path / "elsewhere")
    assert outcome.files["trajectory"] == tmp_path / "elsewhere" / "trajectory.csv"
    assert outcome.files["trajectory"].exists()


def test_run_is_deterministic(tmp_path):
    cfg = doppler_only_config(
        "unused", measurements={"resolution": 2.0, "noise_std": 0.5, "smooth": True}
    )
    path = write_config(tmp_path / "run.json", cfg)
    first = pipeline.run(path, output_dir=tmp_path / "first")
    second = pipeline.run(path, output_dir=tmp_path / "second")
    for name in ("trajectory", "truth", "tracks", "report", "summary"):
        assert first.files[name].read_bytes() == second.files[name].read_bytes()


def test_run_from_a_truth_file(tmp_path):
    truth = shape_motion("U", 1.5, 20, 0.05, center=(1.0, 1.0))
    csvio.write_csv(trajectory_frame(truth), tmp_path / "truth_in.csv")
    cfg = doppler_only_config("out", truth={"file": "truth_in.csv"})
    outcome = pipeline.run(write_config(tmp_path / "run.json", cfg))

    np.testing.assert_array_equal(outcome.truth.velocities, truth.velocities)
    written = read_trajectory(outcome.files["truth"])
    np.testing.assert_array_equal(written.velocities, truth.velocities)


def test_unreadable_truth_is_a_truth_stage_error(tmp_path):
    (tmp_path / "one_row.csv").write_text("k,t,x,y,vx,vy\n0,0,0,0,1,1\n")
    cfg = doppler_only_config("out", truth={"file": "one_row.csv"})
    with pytest.raises(StageError) as info:
        pipeline.run(write_config(tmp_path / "run.json", cfg))
    assert info.value.stage == "truth"


def test_blocked_output_is_an_output_stage_error(doppler_only_file, tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    with pytest.raises(StageError) as info:
        pipeline.run(doppler_only_file, output_dir=blocker / "out")
    assert info.value.stage == "output"


def test_stage_keeps_unrelated_errors():
    with pytest.raises(KeyError):
        with pipeline.stage("solve"):
            raise KeyError("programming error")


def test_full_signal_run(full_signal_file, tmp_path):
    outcome = pipeline.run(full_signal_file)

    extras = outcome.report.extras
    assert len(extras["clutter_suppression_db"]) == 3
    assert min(extras["clutter_suppression_db"]) >= 40
    assert max(extras["track_rmse"]) < 2.0
    assert outcome.tracks.num_instants == 20
    assert outcome.tracks.valid.mean() > 0.9

    caf = csvio.read_csv(tmp_path / "out" / "caf_rx0.csv")
    assert list(caf.columns) == ["k", "doppler", "amplitude"]
    assert sorted(caf["k"].unique()) == list(range(20))
    assert caf["doppler"].min() == pytest.approx(-100.0)
    assert not (tmp_path / "out" / "trajectory.svg").exists()


def test_full_signal_plots(tmp_path):
    cfg = full_signal_config("out", outputs={"caf_maps": True, "plots": True})
    outcome = pipeline.run(write_config(tmp_path / "full.json", cfg))
    document = outcome.files["caf_rx1_svg"].read_text()
    assert "CAF, receiver 1" in document
    assert document.count("<rect") > 20 * 50
    assert "Doppler track, receiver 2" in outcome.files["tracks_rx2_svg"].read_text()


def test_synth_fixtures_feed_a_run(full_signal_file, tmp_path):
    written = pipeline.synth_fixtures(full_signal_file, tmp_path / "fixtures")
    names = sorted(p.name for p in written)
    assert "truth.csv" in names
    for j in range(3):
        assert f"ref_rx{j}.cf32" in names
        assert f"surv_rx{j}.cf32" in names

    cfg = full_signal_config("from_files", signals_dir="fixtures")
    loaded = pipeline.run(write_config(tmp_path / "from_files.json", cfg))
    synthesized = pipeline.run(full_signal_file)
    assert np.max(np.abs(loaded.tracks.interpolated - synthesized.tracks.interpolated)) <= 2.0


def test_score_files(tmp_path):
    truth = shape_motion("V", 2.0, 30, 0.05)
    shifted = type(truth)(truth.initial_position + (0.3, 0.4), truth.velocities, truth.step)
    csvio.write_csv(trajectory_frame(truth), tmp_path / "truth.csv")
    csvio.write_csv(trajectory_frame(shifted), tmp_path / "recon.csv")

    report = pipeline.score_files(tmp_path / "recon.csv", tmp_path / "truth.csv")
    assert report.p90 == pytest.approx(0.5)
    np.testing.assert_allclose(report.errors, 0.5)


def test_score_files_reads_the_position_columns(tmp_path):
    k = np.arange(10)
    truth = pd.DataFrame({"k": k, "t": k * 0.05, "x": 0.1 * k, "y": 0.0, "vx": 0.0, "vy": 0.0})
    recon = truth.assign(x=0.0)
    csvio.write_csv(truth, tmp_path / "truth.csv")
    csvio.write_csv(recon[["k", "t", "x", "y"]], tmp_path / "recon.csv")

    report = pipeline.score_files(tmp_path / "recon.csv", tmp_path / "truth.csv")
    np.testing.assert_allclose(report.errors, 0.1 * k)


@pytest.mark.slow
@pytest.mark.parametrize(
    "name",
    [
        pytest.param("v_shape_doppler.json", id="V"),
        pytest.param("l_shape_doppler.json", id="L"),
        pytest.param("u_shape_doppler.json", id="U"),
    ],
)
def test_doppler_only_accuracy(name, tmp_path):
    outcome = pipeline.run(CONFIGS / name, output_dir=tmp_path)
    assert outcome.report.p90 < 0.9


@pytest.mark.slow
def test_full_signal_accuracy(tmp_path):
    outcome = pipeline.run(CONFIGS / "v_shape_full.json", output_dir=tmp_path)
    assert min(outcome.report.extras["clutter_suppression_db"]) >= 40
    assert max(outcome.report.extras["track_rmse"]) <= 1.5
    assert outcome.report.p90 < 1.5


@pytest.mark.slow
def test_shipped_runs_are_byte_identical(tmp_path):
    config = CONFIGS / "v_shape_doppler.json"
    first = pipeline.run(config, output_dir=tmp_path / "first")
    second = pipeline.run(config, output_dir=tmp_path / "second")
    for name in ("trajectory", "tracks", "report"):
        assert first.files[name].read_bytes() == second.files[name].read_bytes()

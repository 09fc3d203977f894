import json
import logging
from pathlib import Path

import pytest

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

GEOMETRY = {
    "tx_positions": [[-60.0, -200.0], [200.0, 150.0]],
    "rx_positions": [[-20.0, -15.0], [20.0, -15.0], [0.0, 22.0]],
    "carrier_frequencies": [1.85e9, 1.87e9],
    "pairing": [0, 0, 1],
}


def doppler_only_config(output_dir, **overrides):
    """A short noiseless doppler-only run."""
    cfg = {
        "seed": 7,
        "mode": "doppler-only",
        "output_dir": str(output_dir),
        "scenario": GEOMETRY,
        "truth": {"shape": "L", "speed": 2.0, "num_instants": 20, "center": [2.0, -1.0]},
        "measurements": {"resolution": 0.0, "noise_std": 0.0},
        "solver": {
            "grid_shape": [5, 5],
            "candidates_per_point": 2,
            "init_position_region": [-10.0, 10.0, -10.0, 10.0],
        },
        "outputs": {"plots": True},
    }
    cfg.update(overrides)
    return cfg


def full_signal_config(output_dir, **overrides):
    """A short full-signal run at a low sample rate."""
    channel = {
        "los_gain": [1.0, 0.0],
        "clutter_paths": [
            {"gain": [0.3, 0.2], "delay": 5e-4},
            {"gain": [-0.1, 0.15], "delay": 1e-3},
        ],
        "target_gain": [0.0316, 0.0],
        "noise_power": 1e-4,
    }
    cfg = {
        "seed": 3,
        "mode": "full-signal",
        "output_dir": str(output_dir),
        "scenario": GEOMETRY,
        "truth": {
            "waypoints": [[-1.5, -1.5], [1.5, 1.5]],
            "speed": 2.0,
            "num_instants": 20,
        },
        "waveform": {"bandwidth": 3000.0, "sample_rate": 4000.0},
        "channels": [channel, channel, channel],
        "canceller": {"max_delay_taps": 8},
        "caf": {"window": 0.5, "doppler_min": -100.0, "doppler_max": 100.0},
        "kalman": {"process_noise": 0.05, "measurement_noise": 0.33, "backward_pass": True},
        "solver": {
            "grid_shape": [3, 3],
            "candidates_per_point": 2,
            "init_position_region": [-10.0, 10.0, -10.0, 10.0],
        },
        "outputs": {"caf_maps": True, "plots": False},
    }
    cfg.update(overrides)
    return cfg


def write_config(path, cfg):
    path.write_text(json.dumps(cfg, indent=2))
    return path


@pytest.fixture
def doppler_only_file(tmp_path):
    return write_config(tmp_path / "run.json", doppler_only_config(tmp_path / "out"))


@pytest.fixture
def full_signal_file(tmp_path):
    return write_config(tmp_path / "full.json", full_signal_config(tmp_path / "out"))


@pytest.fixture(autouse=True)
def reset_logging():
    yield
    logger = logging.getLogger("doptrack")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    logger.setLevel(logging.NOTSET)

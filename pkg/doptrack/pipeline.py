import json
import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from doptrack.config import RunConfig, load_config
from doptrack.detection import CafConfig, CafMap, caf_maps, caf_window, cancel, detect
from doptrack.errors import DoptrackError, LengthMismatchError, StageError
from doptrack.plots import (
    caf_heatmap,
    doppler_tracks,
    error_cdf,
    trajectory_overlay,
    write_svg,
)
from doptrack.report import (
    ErrorReport,
    read_positions,
    read_trajectory,
    score,
    trajectory_frame,
)
from doptrack.scenario import (
    MotionParams,
    ScenarioGeometry,
    forward_doppler,
    motion_from_waypoints,
    propagate,
    shape_motion,
)
from doptrack.signal import (
    IqBuffer,
    WaveformSpec,
    gen_waveform,
    read_iq,
    synth_reference,
    synth_surveillance,
    write_iq,
)
from doptrack.solver import MeasurementSet, SolveResult, simulate_measurements, solve
from doptrack.tracking import DopplerTrackSet, build_track_set, tracks_from_measurements
from doptrack.utils import csvio
from doptrack.utils.seeds import derive_seed

logger = logging.getLogger(__name__)


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Tag any failure inside the block with the pipeline stage name."""
    logger.info("stage %s", name)
    try:
        yield
    except StageError:
        raise
    except (DoptrackError, ValueError, ArithmeticError, OSError) as error:
        raise StageError(name, error) from error


@dataclass
class RunOutcome:
    report: ErrorReport
    result: SolveResult
    tracks: DopplerTrackSet
    truth: MotionParams
    files: Dict[str, Path] = field(default_factory=dict)


def build_truth(cfg: RunConfig) -> MotionParams:
    truth = cfg.truth
    if truth.file is not None:
        return read_trajectory(truth.file)
    if truth.waypoints is not None:
        return motion_from_waypoints(truth.waypoints, truth.speed, truth.num_instants, truth.step)
    return shape_motion(
        truth.shape,
        truth.speed,
        truth.num_instants,
        truth.step,
        center=truth.center,
        heading=truth.heading,
    )


def signal_layout(cfg: RunConfig, truth: MotionParams) -> Tuple[CafConfig, WaveformSpec]:
    """CAF settings and a waveform long enough for one window per instant.

    Window ``k`` is centered on the middle of detection interval ``k``.
    """
    rate = cfg.waveform.sample_rate
    caf_cfg = cfg.caf.to_config(rate, truth.step)
    samples = (truth.num_instants - 1) * caf_cfg.hop_samples + caf_cfg.window_samples
    spec = WaveformSpec(
        bandwidth=cfg.waveform.bandwidth,
        sample_rate=rate,
        duration=samples / rate,
        start_time=truth.step / 2 - caf_cfg.window_samples / (2 * rate),
    )
    return caf_cfg, spec


def synthesize(
    cfg: RunConfig, g: ScenarioGeometry, truth: MotionParams
) -> List[Tuple[IqBuffer, IqBuffer]]:
    """Reference and surveillance buffers of every receiver."""
    _, spec = signal_layout(cfg, truth)
    waves = {}
    pairs = []
    for j, ch in enumerate(cfg.receiver_channels()):
        i = g.pairing[j]
        if i not in waves:
            seeded = spec.model_copy(update={"seed": derive_seed(cfg.seed, "waveform", i)})
            waves[i] = gen_waveform(seeded)
        ref = synth_reference(waves[i], ch, derive_seed(cfg.seed, "reference", j))
        surv = synth_surveillance(
            waves[i], ch, g, j, truth, derive_seed(cfg.seed, "surveillance", j)
        )
        pairs.append((ref, surv))
    return pairs


def load_signals(directory: Path, num_receivers: int) -> List[Tuple[IqBuffer, IqBuffer]]:
    return [
        (read_iq(directory / f"ref_rx{j}"), read_iq(directory / f"surv_rx{j}"))
        for j in range(num_receivers)
    ]


def zero_doppler_amplitude(caf_map: CafMap) -> float:
    zero = np.flatnonzero(np.isclose(caf_map.frequencies, 0.0))
    return float(caf_map.amplitudes[zero[0]]) if len(zero) else float("nan")


@dataclass
class SignalOutcome:
    tracks: DopplerTrackSet
    maps: List[List[CafMap]]
    clutter_suppression_db: List[float]


def full_signal_tracks(
    cfg: RunConfig, g: ScenarioGeometry, truth: MotionParams
) -> SignalOutcome:
    caf_cfg, _ = signal_layout(cfg, truth)
    canceller_cfg = cfg.canceller.to_config(caf_cfg.window_samples)

    with stage("synth"):
        if cfg.signals_dir is not None:
            pairs = load_signals(cfg.signals_dir, g.num_receivers)
        else:
            pairs = synthesize(cfg, g, truth)

    detections, maps, suppression = [], [], []
    for j, (ref, surv) in enumerate(pairs):
        with stage("cancel"):
            cleaned = cancel(surv, ref, canceller_cfg)

        with stage("caf"):
            before = zero_doppler_amplitude(caf_window(surv, ref, 0, caf_cfg, j))
            receiver_maps = caf_maps(cleaned, ref, caf_cfg, j)
            if len(receiver_maps) != truth.num_instants:
                raise LengthMismatchError(
                    f"receiver {j}: {len(receiver_maps)} CAF windows for "
                    f"{truth.num_instants} instants"
                )
            after = zero_doppler_amplitude(receiver_maps[0])
            suppression.append(20 * np.log10(before / after) if after > 0 else float("inf"))
            logger.info("receiver %d: clutter suppressed by %.1f dB", j, suppression[-1])
            detections.append([detect(m, caf_cfg) for m in receiver_maps])

        if cfg.outputs.caf_maps:
            maps.append(receiver_maps)

    with stage("track"):
        tracks = build_track_set(detections, truth.step, cfg.kalman)
    return SignalOutcome(tracks, maps, suppression)


def doppler_only_tracks(
    cfg: RunConfig, g: ScenarioGeometry, truth: MotionParams
) -> DopplerTrackSet:
    with stage("track"):
        rng = np.random.default_rng(derive_seed(cfg.seed, "measurements"))
        z = simulate_measurements(
            g, truth, cfg.measurements.resolution, cfg.measurements.noise_std, rng
        )
        return tracks_from_measurements(z, cfg.kalman, smoothing=cfg.measurements.smooth)


def caf_frame(maps: List[CafMap]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "k": np.repeat([m.k for m in maps], [len(m.amplitudes) for m in maps]),
            "doppler": np.concatenate([m.frequencies for m in maps]),
            "amplitude": np.concatenate([m.amplitudes for m in maps]),
        }
    )


def run_summary(cfg: RunConfig, result: SolveResult) -> dict:
    def finite(value):
        return float(value) if np.isfinite(value) else None

    return {
        "seed": cfg.seed,
        "mode": cfg.mode,
        "best_start": result.best_start,
        "objective": finite(result.objective),
        "penalty": finite(result.penalty),
        "ambiguous": result.ambiguous,
        "warnings": list(result.warnings),
        "starts": [
            {
                "objective": finite(s.objective),
                "penalty": finite(s.penalty),
                "iterations": s.iterations,
                "converged": s.converged,
                "reason": s.reason,
            }
            for s in result.per_start
        ],
    }


def write_outputs(
    cfg: RunConfig,
    truth: MotionParams,
    result: SolveResult,
    tracks: DopplerTrackSet,
    report: ErrorReport,
    maps: List[List[CafMap]],
) -> Dict[str, Path]:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "trajectory": out / "trajectory.csv",
        "truth": out / "truth.csv",
        "tracks": out / "tracks.csv",
        "report": out / "report.json",
        "summary": out / "summary.json",
    }

    csvio.write_csv(trajectory_frame(result.best), files["trajectory"])
    csvio.write_csv(trajectory_frame(truth), files["truth"])
    csvio.write_csv(tracks.to_frame(), files["tracks"])
    files["report"].write_text(report.to_json())
    files["summary"].write_text(
        json.dumps(run_summary(cfg, result), indent=2, sort_keys=True) + "\n"
    )

    for j, receiver_maps in enumerate(maps):
        files[f"caf_rx{j}"] = out / f"caf_rx{j}.csv"
        csvio.write_csv(caf_frame(receiver_maps), files[f"caf_rx{j}"])

    if cfg.outputs.plots:
        files["trajectory_svg"] = out / "trajectory.svg"
        files["error_cdf_svg"] = out / "error_cdf.svg"
        write_svg(
            files["trajectory_svg"],
            trajectory_overlay(propagate(truth).positions, result.trajectory.positions),
        )
        write_svg(files["error_cdf_svg"], error_cdf(report.cdf_x, report.cdf_p))

        times = np.arange(tracks.num_instants) * tracks.step
        true_doppler = forward_doppler(cfg.scenario, truth)
        for j in range(tracks.num_receivers):
            files[f"tracks_rx{j}_svg"] = out / f"tracks_rx{j}.svg"
            raw = np.where(tracks.valid[j], tracks.raw[j], np.nan)
            write_svg(
                files[f"tracks_rx{j}_svg"],
                doppler_tracks(times, raw, tracks.smoothed[j], true_doppler[:, j], receiver=j),
            )
        for j, receiver_maps in enumerate(maps):
            files[f"caf_rx{j}_svg"] = out / f"caf_rx{j}.svg"
            write_svg(
                files[f"caf_rx{j}_svg"],
                caf_heatmap(
                    np.array([m.k for m in receiver_maps]) * tracks.step,
                    receiver_maps[0].frequencies,
                    np.array([m.amplitudes for m in receiver_maps]),
                    receiver=j,
                ),
            )

    return files


def run(config: Union[str, Path, RunConfig], output_dir: Optional[Path] = None) -> RunOutcome:
    """
    Run the whole pipeline described by a configuration.

    Parameters
    ----------
    config : str, Path or RunConfig
        Path of a JSON run file, or an already loaded configuration.

    output_dir : Path, optional
        Overrides ``output_dir`` of the configuration.

    Returns
    -------
    RunOutcome
        Error report, solver result, tracks and the written files.

    Raises
    ------
    StageError
        Naming the stage that failed.
    """
    with stage("config"):
        cfg = config if isinstance(config, RunConfig) else load_config(config)
    if output_dir is not None:
        cfg = cfg.model_copy(update={"output_dir": Path(output_dir)})

    g = cfg.scenario
    with stage("truth"):
        truth = build_truth(cfg)

    maps: List[List[CafMap]] = []
    extras: Dict[str, List[float]] = {}
    if cfg.mode == "full-signal":
        outcome = full_signal_tracks(cfg, g, truth)
        tracks, maps = outcome.tracks, outcome.maps
        truth_doppler = forward_doppler(g, truth).T
        extras["clutter_suppression_db"] = outcome.clutter_suppression_db
        extras["track_rmse"] = list(
            np.sqrt(np.mean((tracks.smoothed - truth_doppler) ** 2, axis=1))
        )
    else:
        tracks = doppler_only_tracks(cfg, g, truth)

    z: MeasurementSet = tracks.to_measurements()
    with stage("solve"):
        solver_cfg = cfg.solver.model_copy(update={"seed": derive_seed(cfg.seed, "solver")})
        result = solve(z, g, solver_cfg)

    with stage("score"):
        report = score(result.trajectory, propagate(truth))
        fitted = forward_doppler(g, result.best)
        doppler_rmse = list(np.sqrt(np.mean((fitted - z.z) ** 2, axis=0)))
        report = ErrorReport(
            report.errors,
            report.p50,
            report.p90,
            report.max,
            report.cdf_x,
            report.cdf_p,
            doppler_rmse=doppler_rmse,
            extras=extras,
        )
    logger.info("P50 %.3f m, P90 %.3f m, max %.3f m", report.p50, report.p90, report.max)

    with stage("output"):
        files = write_outputs(cfg, truth, result, tracks, report, maps)

    return RunOutcome(report, result, tracks, truth, files)


def synth_fixtures(config: Union[str, Path, RunConfig], output_dir: Optional[Path] = None) -> List[Path]:
    """Write IQ fixtures of every receiver plus the truth trajectory."""
    with stage("config"):
        cfg = config if isinstance(config, RunConfig) else load_config(config)
    out = Path(output_dir) if output_dir is not None else cfg.output_dir

    with stage("truth"):
        truth = build_truth(cfg)
    with stage("synth"):
        pairs = synthesize(cfg, cfg.scenario, truth)

    with stage("output"):
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for j, (ref, surv) in enumerate(pairs):
            written.append(write_iq(out / f"ref_rx{j}", ref))
            written.append(write_iq(out / f"surv_rx{j}", surv))
        truth_path = out / "truth.csv"
        csvio.write_csv(trajectory_frame(truth), truth_path)
        written.append(truth_path)
    return written


def score_files(reconstructed: Union[str, Path], truth: Union[str, Path]) -> ErrorReport:
    with stage("score"):
        return score(read_positions(reconstructed), read_positions(truth))

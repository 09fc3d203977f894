import numpy as np
import pytest
from pydantic import ValidationError

from doptrack.detection import (
    CafConfig,
    CafMap,
    CancellerConfig,
    caf_maps,
    caf_window,
    cancel,
    cfar_threshold,
    detect,
)
from doptrack.detection.clutter import blocks, delayed_columns
from doptrack.errors import LengthMismatchError, SingularSystemError, WindowRangeError
from doptrack.signal import IqBuffer, WaveformSpec, delay_samples, gen_waveform

RATE = 10_000.0


def buffer(samples, label=""):
    return IqBuffer(samples, RATE, label=label)


def tone(n, frequency, start=0):
    return np.exp(2j * np.pi * frequency * (start + np.arange(n)) / RATE)


def power_db(samples, reference):
    return 10 * np.log10(np.mean(np.abs(samples) ** 2) / np.mean(np.abs(reference) ** 2))


@pytest.fixture
def ref():
    spec = WaveformSpec(bandwidth=8_000.0, sample_rate=RATE, duration=0.5, seed=11)
    return gen_waveform(spec)


@pytest.fixture
def long_ref():
    spec = WaveformSpec(bandwidth=8_000.0, sample_rate=RATE, duration=2.0, seed=12)
    return gen_waveform(spec)


@pytest.fixture
def caf_cfg():
    return CafConfig.from_durations(RATE, window=0.5, step=0.05)


def flat_map(amplitudes, bin_width=2.0):
    amplitudes = np.asarray(amplitudes, dtype=float)
    frequencies = (np.arange(len(amplitudes)) - len(amplitudes) // 2) * bin_width
    return CafMap(amplitudes, frequencies, k=0)


# Clutter cancellation


@pytest.mark.parametrize(
    "taps,delay,max_db",
    [
        pytest.param(1, 0, -60.0, id="scaled reference"),
        pytest.param(8, 0, -60.0, id="scaled reference, eight taps"),
        pytest.param(8, 5, -60.0, id="delay inside the subspace"),
    ],
)
def test_cancel_removes_reference_copies(ref, taps, delay, max_db):
    surv = buffer(0.7 * delay_samples(ref.samples, delay))
    cleaned = cancel(surv, ref, CancellerConfig(max_delay_taps=taps, block_length=len(ref)))
    assert power_db(cleaned.samples, surv.samples) <= max_db
    assert len(cleaned) == len(surv)
    assert cleaned.label == "cleaned"


def test_cancel_misses_delays_outside_the_subspace(ref):
    surv = buffer(delay_samples(ref.samples, 5))
    cleaned = cancel(surv, ref, CancellerConfig(max_delay_taps=3, block_length=len(ref)))
    assert power_db(cleaned.samples, surv.samples) > -10.0


def clutter_scene(ref, seed=0):
    rng = np.random.default_rng(seed)
    clutter = (
        ref.samples
        + (0.3 + 0.2j) * delay_samples(ref.samples, 2)
        - 0.1j * delay_samples(ref.samples, 6)
    )
    noise = 0.01 * (rng.standard_normal(len(ref)) + 1j * rng.standard_normal(len(ref)))
    return buffer(clutter + noise)


@pytest.mark.parametrize(
    "block_length",
    [
        pytest.param(5000, id="one block"),
        pytest.param(1200, id="blocks with a merged remainder"),
    ],
)
def test_cancel_is_an_orthogonal_projection(ref, block_length):
    surv = clutter_scene(ref)
    cfg = CancellerConfig(max_delay_taps=8, block_length=block_length, regularization=0.0)
    cleaned = cancel(surv, ref, cfg)

    again = cancel(cleaned, ref, cfg)
    np.testing.assert_allclose(again.samples, cleaned.samples, atol=1e-6 * np.abs(cleaned.samples).max())

    columns = delayed_columns(ref.samples, 8)
    for start, stop in blocks(len(ref), block_length):
        residual = cleaned.samples[start:stop]
        x = columns[start:stop]
        inner = np.abs(x.conj().T @ residual)
        norms = np.linalg.norm(residual) * np.linalg.norm(x, axis=0)
        assert np.all(inner / norms <= 1e-6)


def test_cancel_is_linear_in_the_surveillance(ref):
    cfg = CancellerConfig(max_delay_taps=4, block_length=len(ref), regularization=0.0)
    a, b = clutter_scene(ref, 1), clutter_scene(ref, 2)
    combined = cancel(buffer(2 * a.samples - 1j * b.samples), ref, cfg)
    separate = 2 * cancel(a, ref, cfg).samples - 1j * cancel(b, ref, cfg).samples
    np.testing.assert_allclose(combined.samples, separate, atol=1e-9)


def test_blocks_merge_the_remainder():
    assert list(blocks(5300, 1000)) == [(0, 1000), (1000, 2000), (2000, 3000), (3000, 4000), (4000, 5300)]
    assert list(blocks(1000, 1000)) == [(0, 1000)]


def test_cancel_keeps_a_moving_target(ref, caf_cfg):
    target = 0.05 * ref.samples * tone(len(ref), 50.0)
    surv = buffer(clutter_scene(ref).samples + target)
    cleaned = cancel(surv, ref, CancellerConfig(block_length=len(ref)))

    before = caf_window(surv, ref, 0, caf_cfg)
    after = caf_window(cleaned, ref, 0, caf_cfg)
    target_only = caf_window(buffer(target), ref, 0, caf_cfg)
    zero = np.flatnonzero(before.frequencies == 0.0)[0]
    fifty = np.flatnonzero(before.frequencies == 50.0)[0]

    assert 20 * np.log10(before.amplitudes[zero] / after.amplitudes[zero]) >= 40
    assert 20 * np.log10(after.amplitudes[fifty] / target_only.amplitudes[fifty]) >= -3


@pytest.mark.parametrize(
    "surv_length,block_length,error",
    [
        pytest.param(4000, 1000, LengthMismatchError, id="different lengths"),
        pytest.param(5000, 6000, LengthMismatchError, id="shorter than a block"),
    ],
)
def test_cancel_length_checks(ref, surv_length, block_length, error):
    surv = buffer(ref.samples[:surv_length])
    with pytest.raises(error):
        cancel(surv, ref, CancellerConfig(block_length=block_length))


def test_cancel_singular_without_regularization():
    zeros = buffer(np.zeros(100))
    with pytest.raises(SingularSystemError):
        cancel(zeros, zeros, CancellerConfig(max_delay_taps=4, block_length=50, regularization=0.0))


def test_canceller_needs_fewer_taps_than_samples():
    with pytest.raises(ValidationError):
        CancellerConfig(max_delay_taps=16, block_length=16)


# Cross-ambiguity function


@pytest.mark.parametrize(
    "rate,expected",
    [
        pytest.param(RATE, 5000, id="desk-scale rate"),
        pytest.param(3.84e6, 1_920_000, id="cellular rate"),
    ],
)
def test_half_second_windows_give_two_hertz_bins(rate, expected):
    cfg = CafConfig.from_durations(rate, window=0.5, step=0.05)
    assert cfg.window_samples == expected
    assert cfg.bin_width(rate) == 2.0
    assert cfg.hop_samples == round(0.05 * rate)
    grid = cfg.doppler_grid(rate)
    assert grid[0] == -250.0 and grid[-1] == 250.0
    np.testing.assert_allclose(np.diff(grid), 2.0)


def test_identical_channels_peak_at_zero_doppler(ref, caf_cfg):
    caf = caf_window(ref, ref, 0, caf_cfg)
    assert caf.frequencies[np.argmax(caf.amplitudes)] == 0.0
    assert caf.best_delay == 0


@pytest.mark.parametrize(
    "frequency",
    [
        pytest.param(50.0, id="on a bin"),
        pytest.param(37.3, id="between bins"),
        pytest.param(-123.9, id="negative"),
        pytest.param(0.9, id="near zero"),
    ],
)
def test_tone_is_found_within_one_hertz(ref, caf_cfg, frequency):
    surv = buffer(ref.samples * tone(len(ref), frequency))
    caf = caf_window(surv, ref, 0, caf_cfg)
    assert abs(caf.frequencies[np.argmax(caf.amplitudes)] - frequency) <= 1.0


def test_fft_and_direct_evaluation_agree(ref, caf_cfg):
    rng = np.random.default_rng(4)
    surv = buffer(ref.samples * tone(len(ref), 12.0) + rng.normal(size=len(ref)))
    fast = caf_window(surv, ref, 0, caf_cfg, method="fft")
    slow = caf_window(surv, ref, 0, caf_cfg, method="direct")
    assert np.max(np.abs(fast.amplitudes - slow.amplitudes)) <= 1e-9 * fast.amplitudes.max()


def test_windows_follow_a_chirp(long_ref, caf_cfg):
    t = np.arange(len(long_ref)) / RATE
    rate_of_change = 4.0
    surv = buffer(long_ref.samples * np.exp(2j * np.pi * (20.0 * t + 0.5 * rate_of_change * t**2)))
    maps = caf_maps(surv, long_ref, caf_cfg)
    assert len(maps) == caf_cfg.num_windows(len(long_ref)) == 31

    for caf in maps:
        center = (caf.k * caf_cfg.hop_samples + caf_cfg.window_samples / 2) / RATE
        expected = 20.0 + rate_of_change * center
        assert abs(caf.frequencies[np.argmax(caf.amplitudes)] - expected) <= 2.0


def test_delay_grid_finds_the_echo_delay(ref):
    cfg = CafConfig(window_samples=5000, hop_samples=500, delay_grid=[0, 1, 2, 3, 4])
    surv = buffer(delay_samples(ref.samples, 3) * tone(len(ref), 30.0))
    caf = caf_window(surv, ref, 0, cfg)
    assert caf.best_delay == 3
    assert caf.frequencies[np.argmax(caf.amplitudes)] == 30.0


@pytest.mark.parametrize(
    "k",
    [
        pytest.param(-1, id="negative"),
        pytest.param(1, id="past the end"),
    ],
)
def test_window_out_of_range(ref, caf_cfg, k):
    with pytest.raises(WindowRangeError):
        caf_window(ref, ref, k, caf_cfg)


def test_caf_length_mismatch(ref, caf_cfg):
    with pytest.raises(LengthMismatchError):
        caf_window(buffer(ref.samples[:-1]), ref, 0, caf_cfg)


@pytest.mark.parametrize(
    "kwargs",
    [
        pytest.param({"doppler_min": 10.0, "doppler_max": -10.0}, id="empty Doppler range"),
        pytest.param({"gamma": 1.0}, id="gamma not above one"),
        pytest.param({"train_half_len": 0}, id="no training cells"),
        pytest.param({"delay_grid": []}, id="no delays"),
    ],
)
def test_caf_config_invariants(kwargs):
    with pytest.raises(ValidationError):
        CafConfig(window_samples=5000, hop_samples=500, **kwargs)


# CFAR detection


def test_flat_map_threshold_and_miss(caf_cfg):
    caf = flat_map(np.full(41, 3.0))
    np.testing.assert_allclose(cfar_threshold(caf, caf_cfg), caf_cfg.gamma * 3.0)
    assert not detect(caf, caf_cfg).valid


@pytest.mark.parametrize("include_test_cell", [True, False])
def test_all_zero_map_is_a_miss(include_test_cell):
    cfg = CafConfig(
        window_samples=5000, hop_samples=500, include_test_cell=include_test_cell
    )
    detection = detect(flat_map(np.zeros(40)), cfg)
    assert not detection.valid
    assert detection.amplitude == 0.0


@pytest.mark.parametrize(
    "gamma,include_test_cell,threshold,valid",
    [
        pytest.param(1.5, True, 1.5 * 17.0 / 17, True, id="literal training sum"),
        pytest.param(16.9, True, 16.9 * 17.0 / 17, True, id="just below seventeen"),
        pytest.param(17.5, True, 17.5 * 17.0 / 17, False, id="above seventeen"),
        pytest.param(17.5, False, 0.0, True, id="test cell excluded"),
    ],
)
def test_spike_threshold(gamma, include_test_cell, threshold, valid):
    cfg = CafConfig(
        window_samples=5000,
        hop_samples=500,
        gamma=gamma,
        train_half_len=8,
        include_test_cell=include_test_cell,
    )
    amplitudes = np.zeros(41)
    amplitudes[20] = 17.0
    caf = flat_map(amplitudes)
    assert cfar_threshold(caf, cfg)[20] == pytest.approx(threshold)
    detection = detect(caf, cfg)
    assert detection.valid is valid
    assert detection.doppler == caf.frequencies[20]


def test_edge_cells_are_renormalized(caf_cfg):
    amplitudes = np.arange(41, dtype=float)
    thresholds = cfar_threshold(flat_map(amplitudes), caf_cfg)
    assert thresholds[0] == pytest.approx(caf_cfg.gamma * np.mean(amplitudes[:9]))
    assert thresholds[-1] == pytest.approx(caf_cfg.gamma * np.mean(amplitudes[-9:]))


def test_noise_only_map_passes_about_half_at_unit_gamma():
    rng = np.random.default_rng(8)
    amplitudes = np.abs(rng.normal(size=4000) + 1j * rng.normal(size=4000))
    cfg = CafConfig(window_samples=5000, hop_samples=500, gamma=1 + 1e-9)
    passing = amplitudes >= cfar_threshold(flat_map(amplitudes), cfg)
    assert 0.35 <= passing.mean() <= 0.55


def test_detect_picks_the_strongest_passing_cell(caf_cfg):
    amplitudes = np.zeros(61)
    amplitudes[15], amplitudes[45] = 7.0, 10.0
    caf = flat_map(amplitudes)
    detection = detect(caf, caf_cfg)
    assert detection.valid
    assert detection.doppler == caf.frequencies[45]
    assert detection.amplitude == 10.0


def test_ties_go_to_the_lower_frequency(caf_cfg):
    amplitudes = np.zeros(61)
    amplitudes[15] = amplitudes[45] = 10.0
    caf = flat_map(amplitudes)
    assert detect(caf, caf_cfg).doppler == caf.frequencies[15]


def test_grid_shorter_than_training_window(caf_cfg):
    with pytest.raises(ValueError):
        cfar_threshold(flat_map(np.ones(16)), caf_cfg)


def test_threshold_commutes_with_grid_reversal(caf_cfg):
    rng = np.random.default_rng(2)
    half = rng.uniform(0, 5, 20)
    symmetric = np.concatenate([half, [9.0], half[::-1]])
    thresholds = cfar_threshold(flat_map(symmetric), caf_cfg)
    np.testing.assert_allclose(thresholds, thresholds[::-1])


@pytest.mark.parametrize("scale", [pytest.param(s, id=f"x{s}") for s in (0.01, 3.0, 1e4)])
def test_detection_is_scale_invariant(ref, caf_cfg, scale):
    rng = np.random.default_rng(5)
    samples = 0.3 * ref.samples * tone(len(ref), -64.0) + rng.normal(size=len(ref))
    base = detect(caf_window(buffer(samples), ref, 0, caf_cfg), caf_cfg)
    scaled = detect(caf_window(buffer(scale * samples), ref, 0, caf_cfg), caf_cfg)
    assert (scaled.doppler, scaled.valid) == (base.doppler, base.valid)


def test_target_at_ten_db_snr_is_detected(ref, caf_cfg):
    rng = np.random.default_rng(100)
    echo = ref.samples * tone(len(ref), 50.0)
    hits = 0
    for _ in range(100):
        noise = np.sqrt(0.05) * (rng.standard_normal(len(ref)) + 1j * rng.standard_normal(len(ref)))
        detection = detect(caf_window(buffer(echo + noise), ref, 0, caf_cfg), caf_cfg)
        hits += detection.valid and abs(detection.doppler - 50.0) <= caf_cfg.bin_width(RATE)
    assert hits >= 99

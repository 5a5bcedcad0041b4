"""Per-task record drafting: signal synthesis plus QA construction.

Each draft is a pure function of (task, index, format, corpus spec):
the record's rng is derived from the global seed and the sample id, so
records can be generated in any order or in parallel without changing
a single output byte.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .instrgen import (
    TASK_TAGS,
    canonical_number,
    make_ajsd_openqa,
    make_mcqa_categorical,
    make_mcqa_numeric,
    make_mcqa_question,
    make_openqa,
)
from .signal import IqSignal
from .synth import (
    ANALOG_KINDS,
    BITS_PER_SYMBOL,
    Cw,
    DeviceProfile,
    Jammer,
    JammingScene,
    Lfm,
    ModulationKind,
    PROTOCOL_CLASSES,
    RadarPulseSpec,
    apply_awgn,
    apply_device_profile,
    default_burst_spec,
    gen_jamming_scene,
    gen_noise,
    gen_protocol_burst,
    gen_radar_pulse_train,
    modulate,
)

SSD_CLASSES = ("radar", "communication", "noise")
# "mixed" never occurs as ground truth; it exists so SSD MCQA can field
# three wrong options besides the truth.
SSD_OPTION_UNIVERSE = SSD_CLASSES + ("mixed",)

SSD_COMM_KINDS = (
    ModulationKind.BPSK,
    ModulationKind.QPSK,
    ModulationKind.QAM16,
    ModulationKind.GFSK,
)

MR_KINDS = tuple(ModulationKind)

SPE_PARAMS = ("pulse_width_us", "period_us", "count", "delay_us")
SPE_PARAM_PHRASES = {
    "pulse_width_us": ("pulse width", "µs"),
    "period_us": ("pulse repetition period", "µs"),
    "count": ("pulse count", "pulses"),
    "delay_us": ("initial time delay", "µs"),
}
SPE_TOLERANCE_US = 1.0
SPE_COUNT_TOLERANCE = 0.5

SEGMENT_SAMPLES = 4096
MR_SAMPLES = 1024
MR_SPS = 8
SSD_COMM_SPS = 16
EI_SPS = 8

AJSD_ARCHETYPES = (
    (),
    ("tone",),
    ("multitone",),
    ("noise-band",),
    ("lfm-sweep",),
    ("phase-code",),
    ("tone", "lfm-sweep"),
    ("noise-band", "phase-code"),
)

_EI_FAMILIES = ("x310", "b210", "n210")


def derive_seed(global_seed: int, token: str) -> int:
    """Stable per-sample seed: hash of the global seed and a string token."""
    digest = hashlib.sha256(f"{global_seed}:{token}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def make_device_profiles(count: int) -> tuple[DeviceProfile, ...]:
    """Fixed synthetic device inventory with spread impairment signatures."""
    profiles = []
    for k in range(count):
        sign = 1.0 if k % 2 == 0 else -1.0
        dc_mag = 0.006 * (k + 1)
        dc_angle = 2 * np.pi * k / max(count, 1)
        profiles.append(
            DeviceProfile(
                device_id=f"{_EI_FAMILIES[k % 3]}-{k:02d}",
                iq_gain_imbalance_db=sign * (0.25 + 0.14 * k),
                iq_phase_skew_deg=-sign * (0.5 + 0.6 * k),
                dc_offset=complex(dc_mag * np.cos(dc_angle), dc_mag * np.sin(dc_angle)),
                cfo_ppm=sign * (2.0 + 3.0 * k),
                phase_noise_std_rad=0.0004 * (k % 4),
            )
        )
    return tuple(profiles)


def device_record_counts(total: int, n_devices: int, decay: float = 0.75) -> list[int]:
    """Long-tailed per-device record counts (geometric decay, sums to total)."""
    weights = np.array([decay**k for k in range(n_devices)])
    quotas = total * weights / weights.sum()
    counts = np.floor(quotas).astype(int)
    remainder = total - counts.sum()
    order = np.argsort(-(quotas - counts), kind="stable")
    for idx in order[:remainder]:
        counts[idx] += 1
    return counts.tolist()


@dataclass
class RecordDraft:
    signal: IqSignal
    question: str
    options: tuple | None
    answer: str
    tag: str
    snr_db: float | None
    ground_truth: dict
    constellation_stride: int


def _seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**62))


def _categorical_qa(task, gt, universe, fmt, rng, **fmt_args):
    if fmt == "MCQA":
        options = make_mcqa_categorical(gt, universe, seed=_seed(rng))
        question = make_mcqa_question(task, seed=_seed(rng), **fmt_args)
        return question, options.texts, options.correct_letter
    question, answer = make_openqa(task, gt, seed=_seed(rng), **fmt_args)
    return question, None, answer


def _draft_ssd(index, fmt, spec, rng):
    fs = spec.sample_rates["SSD"]
    duration_us = SEGMENT_SAMPLES / fs * 1e6
    grid = spec.snr_grids["SSD"]
    cls = SSD_CLASSES[index % 3]
    snr = None
    stride = 4
    if cls == "noise":
        sig = gen_noise(SEGMENT_SAMPLES, fs, _seed(rng))
    else:
        labeled_idx = index - index // 3
        snr = grid[labeled_idx % len(grid)]
        if cls == "radar":
            pw = float(rng.choice(np.arange(2.0, 10.5, 0.5)))
            period = float(rng.choice(np.arange(15.0, 41.0, 1.0)))
            count = int(rng.integers(2, 5))
            max_delay = duration_us - ((count - 1) * period + pw)
            delay = float(rng.choice(np.arange(0.0, max(max_delay, 1.0), 1.0)))
            fill = Lfm(float(rng.choice([1e6, 2e6, 4e6]))) if rng.integers(2) else Cw()
            clean = gen_radar_pulse_train(
                RadarPulseSpec(pw, period, count, delay, fill), duration_us, fs
            )
        else:
            kind = SSD_COMM_KINDS[int(rng.integers(len(SSD_COMM_KINDS)))]
            n_bits = (SEGMENT_SAMPLES // SSD_COMM_SPS) * BITS_PER_SYMBOL[kind]
            clean = modulate(kind, rng.integers(0, 2, n_bits), SSD_COMM_SPS, fs)
            stride = SSD_COMM_SPS
        sig = apply_awgn(clean, snr, _seed(rng))
    question, options, answer = _categorical_qa("SSD", cls, SSD_OPTION_UNIVERSE, fmt, rng)
    return RecordDraft(
        sig, question, options, answer, _tag(fmt, "SSD"), snr,
        {"segment_class": cls}, stride,
    )


def _draft_spe(index, fmt, spec, rng):
    fs = spec.sample_rates["SPE"]
    duration_us = SEGMENT_SAMPLES / fs * 1e6
    grid = spec.snr_grids["SPE"]
    snr = grid[index % len(grid)]

    pw = float(rng.choice(np.arange(1.0, 8.5, 0.5)))
    period = float(rng.choice(np.arange(10.0, 41.0, 1.0)))
    count = int(rng.integers(2, 7))
    delay = float(rng.choice(np.arange(2.0, 31.0, 1.0)))
    fill = Lfm(float(rng.choice([1e6, 2e6]))) if rng.integers(3) == 0 else Cw()
    pulse_spec = RadarPulseSpec(pw, period, count, delay, fill)
    sig = apply_awgn(gen_radar_pulse_train(pulse_spec, duration_us, fs), snr, _seed(rng))

    param = SPE_PARAMS[index % 4]
    value = {"pulse_width_us": pw, "period_us": period, "count": count, "delay_us": delay}[param]
    integer = param == "count"
    tolerance = SPE_COUNT_TOLERANCE if integer else SPE_TOLERANCE_US
    phrase, unit = SPE_PARAM_PHRASES[param]
    gt = {
        "parameter": param,
        "value": float(value),
        "tolerance": tolerance,
        "unit": unit,
        "pulse_spec": {
            "pulse_width_us": pw,
            "period_us": period,
            "count": count,
            "delay_us": delay,
        },
    }
    if fmt == "MCQA":
        options = make_mcqa_numeric(float(value), tolerance, seed=_seed(rng), integer=integer)
        question = make_mcqa_question("SPE", seed=_seed(rng), param=phrase, unit=unit)
        return RecordDraft(
            sig, question, options.texts, options.correct_letter, _tag(fmt, "SPE"),
            snr, gt, 4,
        )
    question, answer = make_openqa(
        "SPE", canonical_number(value, integer), seed=_seed(rng), param=phrase, unit=unit
    )
    return RecordDraft(sig, question, None, answer, _tag(fmt, "SPE"), snr, gt, 4)


def _draft_mr(index, fmt, spec, rng):
    fs = spec.sample_rates["MR"]
    grid = spec.snr_grids["MR"]
    snr = grid[index % len(grid)]
    kind = MR_KINDS[index % len(MR_KINDS)]
    if kind in ANALOG_KINDS:
        clean = modulate(kind, _seed(rng), MR_SPS, fs, n_samples=MR_SAMPLES)
    else:
        n_bits = (MR_SAMPLES // MR_SPS) * BITS_PER_SYMBOL[kind]
        clean = modulate(kind, rng.integers(0, 2, n_bits), MR_SPS, fs)
    sig = apply_awgn(clean, snr, _seed(rng))
    universe = [k.value for k in MR_KINDS]
    question, options, answer = _categorical_qa("MR", kind.value, universe, fmt, rng)
    return RecordDraft(
        sig, question, options, answer, _tag(fmt, "MR"), snr, {"modulation": kind.value}, MR_SPS
    )


def _draft_pr(index, fmt, spec, rng):
    fs = spec.sample_rates["PR"]
    duration_us = SEGMENT_SAMPLES / fs * 1e6
    grid = spec.snr_grids["PR"]
    snr = grid[index % len(grid)]
    cls = PROTOCOL_CLASSES[index % len(PROTOCOL_CLASSES)]
    burst = gen_protocol_burst(default_burst_spec(cls), duration_us, fs, seed=_seed(rng))
    sig = apply_awgn(burst, snr, _seed(rng))
    question, options, answer = _categorical_qa("PR", cls, PROTOCOL_CLASSES, fmt, rng)
    return RecordDraft(
        sig, question, options, answer, _tag(fmt, "PR"), snr, {"protocol_class": cls}, 4
    )


def _draft_ei(index, fmt, spec, rng, device_sequence, profiles):
    fs = spec.sample_rates["EI"]
    profile = profiles[device_sequence[index]]
    n_bits = (SEGMENT_SAMPLES // EI_SPS) * 2  # QPSK carrier burst
    clean = modulate(ModulationKind.QPSK, rng.integers(0, 2, n_bits), EI_SPS, fs)
    marked = apply_device_profile(clean, profile, _seed(rng))
    # Real captures carry no SNR annotation; the noise draw stays unrecorded.
    internal_snr = float(rng.choice(np.arange(6.0, 19.0, 2.0)))
    sig = apply_awgn(marked, internal_snr, _seed(rng))
    universe = [p.device_id for p in profiles]
    question, options, answer = _categorical_qa("EI", profile.device_id, universe, fmt, rng)
    return RecordDraft(
        sig, question, options, answer, _tag(fmt, "EI"), None,
        {"device_id": profile.device_id}, EI_SPS,
    )


def _draft_ajsd(index, fmt, spec, rng):
    if fmt != "OpenQA":
        raise ValueError("AJSD records are OpenQA only")
    fs = spec.sample_rates["AJSD"]
    duration_us = SEGMENT_SAMPLES / fs * 1e6
    kinds = AJSD_ARCHETYPES[index % len(AJSD_ARCHETYPES)]
    offsets_mhz = rng.choice(np.arange(-5.0, 5.5, 0.5), size=max(len(kinds), 1), replace=False)
    jammers = tuple(
        Jammer(kind, float(rng.choice([5.0, 10.0, 15.0])), float(offsets_mhz[i]) * 1e6)
        for i, kind in enumerate(kinds)
    )
    if jammers:
        background = "radar" if rng.integers(2) else "comm"
    else:
        background = "noise"
    victim = "radar-mode" if background == "radar" else "comm-mode"
    scene = JammingScene(background, jammers, victim)
    sig, labels = gen_jamming_scene(scene, duration_us, fs, _seed(rng))
    question, reference = make_ajsd_openqa(labels, seed=_seed(rng))
    return RecordDraft(sig, question, None, reference, _tag(fmt, "AJSD"), None, labels, 4)


def _tag(fmt: str, task: str) -> str:
    return "answer" if fmt == "MCQA" else TASK_TAGS[task].value


def draft_record(task: str, index: int, fmt: str, spec, ei_plan=None) -> RecordDraft:
    """Draft one record; `ei_plan` carries the (device_sequence, profiles) pair."""
    sample_id = record_id(task, index)
    rng = np.random.default_rng(derive_seed(spec.global_seed, sample_id))
    if task == "SSD":
        return _draft_ssd(index, fmt, spec, rng)
    if task == "SPE":
        return _draft_spe(index, fmt, spec, rng)
    if task == "MR":
        return _draft_mr(index, fmt, spec, rng)
    if task == "PR":
        return _draft_pr(index, fmt, spec, rng)
    if task == "EI":
        device_sequence, profiles = ei_plan
        return _draft_ei(index, fmt, spec, rng, device_sequence, profiles)
    if task == "AJSD":
        return _draft_ajsd(index, fmt, spec, rng)
    raise ValueError(f"unknown task family {task!r}")


def record_id(task: str, index: int) -> str:
    return f"{task.lower()}-{index:05d}"

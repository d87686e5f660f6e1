"""Plucked-string synthesis: a noise burst circulating in a filtered delay loop.

Per note, the loop is   delay(N) -> damping -> stiffness allpass -> tuning
allpass -> (+ excitation), where the excitation is one period of white noise
shaped by a pick lowpass and a dynamic-level lowpass, then comb-filtered by
the pick position. The total loop delay is tuned to fs/f0 by splitting it
into an integer delay and a fractional part realized by the tuning allpass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numba import njit
from scipy.signal import lfilter

from .music import SAMPLE_RATE, NoteEvent

# Free ring-out allotted past each note's offset, and the linear fade that
# damps the string at the offset boundary.
TAIL_S = 1.0
FADE_S = 0.010

PARAM_RANGES = {
    "amplitude": (0.2, 1.3),
    "brightness": (0.1, 0.9),
    "level": (0.1, 0.9),
    "pick": (0.1, 0.9),
    "detune": (-0.49, 0.49),
}

# Dynamic-level mapping from the unitless level knob to a lowpass bandwidth.
LEVEL_BW_BASE_HZ = 200.0
LEVEL_BW_SPAN_HZ = 5800.0


class FrequencyRangeError(ValueError):
    pass


@dataclass(frozen=True)
class SynthParams:
    amplitude: float = 1.0
    brightness: float = 0.5        # comb position along the string, (0, 1)
    level: float = 0.2             # dynamic-level knob, mapped to bandwidth
    pick: float = 0.5              # pick-direction lowpass pole, [0, 1]
    detune: float = 0.0            # fractional semitones
    damping_stretch: float = 0.5   # two-tap damping mix; phase delay in samples
    loop_gain: float = 0.996
    stiffness_coeff: float = 0.0   # first-order allpass coeff; 0 = bypass

    def __post_init__(self):
        if not 0.0 < self.brightness < 1.0:
            raise ValueError("brightness must be in (0, 1)")
        if not 0.0 <= self.pick <= 1.0:
            raise ValueError("pick must be in [0, 1]")
        if not 0.0 <= self.damping_stretch <= 1.0:
            raise ValueError("damping stretch must be in [0, 1]")
        if not 0.0 < self.loop_gain <= 1.0:
            raise ValueError("loop gain must be in (0, 1]")
        if not -1.0 < self.stiffness_coeff <= 0.0:
            raise ValueError("stiffness coefficient must be in (-1, 0]")


@dataclass
class AudioBuffer:
    """Mono sample sequence; samples are float64, finite by construction."""

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("audio buffers are mono (1-D)")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise ValueError("audio buffer contains NaN or Inf")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def peak(self) -> float:
        return float(np.max(np.abs(self.samples))) if len(self) else 0.0

    def rms(self) -> float:
        return float(np.sqrt(np.mean(self.samples ** 2))) if len(self) else 0.0


@dataclass(frozen=True)
class LoopPlan:
    n_int: int          # integer delay, samples
    frac_delay: float   # fractional delay handled by the tuning allpass
    eta: float          # tuning-allpass coefficient
    comb_delay: int     # pick-position comb delay, samples


def midi_to_freq(midi: float, detune: float = 0.0) -> float:
    """Fundamental in Hz: 440 * 2^((midi + detune - 69) / 12)."""
    f0 = 440.0 * 2.0 ** ((midi + detune - 69.0) / 12.0)
    if f0 >= SAMPLE_RATE / 2:
        raise FrequencyRangeError(f"{f0:.1f} Hz is at or above Nyquist")
    return f0


def fractional_delay_coeff(frac_delay: float) -> float:
    """First-order allpass coefficient with low-frequency phase delay
    `frac_delay`; maps [0.2, 1.2] samples onto [2/3, -1/11]."""
    return (1.0 - frac_delay) / (1.0 + frac_delay)


def level_bandwidth_hz(level: float) -> float:
    return LEVEL_BW_BASE_HZ + level * LEVEL_BW_SPAN_HZ


def pole_from_bandwidth(bandwidth_hz: float, fs: int = SAMPLE_RATE) -> float:
    """One-pole lowpass pole e^(-pi * bandwidth / fs)."""
    return math.exp(-math.pi * bandwidth_hz / fs)


def plan_loop(f0: float, params: SynthParams, fs: int = SAMPLE_RATE) -> LoopPlan:
    """Split the target period fs/f0 into integer delay, allpass fractional
    delay, and the known phase delays of the in-loop filters."""
    if not 20.0 < f0 < fs / 2:
        raise FrequencyRangeError(f"f0 {f0:.1f} Hz outside (20, {fs / 2})")
    d_loop = fs / f0 - params.damping_stretch
    if params.stiffness_coeff != 0.0:
        a = params.stiffness_coeff
        d_loop -= (1.0 - a) / (1.0 + a)
    n_int = math.floor(d_loop - 0.2)
    if n_int < 2:
        raise FrequencyRangeError(f"f0 {f0:.1f} Hz leaves loop delay below 2")
    frac = d_loop - n_int  # in [0.2, 1.2)
    comb = max(1, math.floor(params.brightness * n_int + 0.5))
    return LoopPlan(n_int, frac, fractional_delay_coeff(frac), comb)


def sample_params(rng: np.random.Generator) -> SynthParams:
    return SynthParams(
        amplitude=float(rng.uniform(*PARAM_RANGES["amplitude"])),
        brightness=float(rng.uniform(*PARAM_RANGES["brightness"])),
        level=float(rng.uniform(*PARAM_RANGES["level"])),
        pick=float(rng.uniform(*PARAM_RANGES["pick"])),
        detune=float(rng.uniform(*PARAM_RANGES["detune"])),
    )


def make_excitation(n_int: int, params: SynthParams, rng: np.random.Generator,
                    fs: int = SAMPLE_RATE) -> np.ndarray:
    """One loop period of white noise through the pick-direction lowpass
    (pole = pick) and the dynamic-level lowpass (pole from bandwidth)."""
    if n_int < 2:
        raise ValueError("excitation needs at least 2 samples")
    noise = rng.uniform(-1.0, 1.0, n_int)
    p = params.pick
    shaped = lfilter([1.0 - p], [1.0, -p], noise)
    r = pole_from_bandwidth(level_bandwidth_hz(params.level), fs)
    shaped = lfilter([1.0 - r], [1.0, -r], shaped)
    return params.amplitude * shaped


@njit(cache=True)
def _string_loop(exc: np.ndarray, n_int: int, gain: float, stretch: float,
                 eta: float, stiff: float, use_stiffness: bool,
                 out: np.ndarray) -> None:
    """y[n] = exc[n] + tune(stiffen(damp(y[n - n_int]))), run in place."""
    n = out.shape[0]
    ne = exc.shape[0]
    stiff_state = 0.0
    tune_state = 0.0
    for i in range(n):
        z0 = out[i - n_int] if i >= n_int else 0.0
        z1 = out[i - n_int - 1] if i > n_int else 0.0
        w = gain * ((1.0 - stretch) * z0 + stretch * z1)
        if use_stiffness:
            v = stiff * w + stiff_state
            stiff_state = w - stiff * v
        else:
            v = w
        u = eta * v + tune_state
        tune_state = v - eta * u
        x = exc[i] if i < ne else 0.0
        out[i] = x + u


def render_tone(midi: float, params: SynthParams, duration_s: float,
                fs: int = SAMPLE_RATE,
                rng: Optional[np.random.Generator] = None) -> AudioBuffer:
    """Render one plucked tone: `duration_s` of ring plus the release tail,
    with a 10 ms linear fade damping the string at the offset boundary."""
    if rng is None:
        rng = np.random.default_rng(0)
    if duration_s <= 0:
        raise ValueError("duration must be positive")
    f0 = midi_to_freq(midi, params.detune)
    plan = plan_loop(f0, params, fs)
    exc = make_excitation(plan.n_int, params, rng, fs)
    comb_in = np.zeros(len(exc) + plan.comb_delay)
    comb_in[: len(exc)] += exc
    comb_in[plan.comb_delay:] -= exc

    n_total = int(round((duration_s + TAIL_S) * fs))
    out = np.zeros(n_total)
    _string_loop(comb_in, plan.n_int, params.loop_gain, params.damping_stretch,
                 plan.eta, params.stiffness_coeff,
                 params.stiffness_coeff != 0.0, out)

    fade_at = int(round(duration_s * fs))
    if fade_at < n_total:
        k = min(int(round(FADE_S * fs)), n_total - fade_at)
        out[fade_at:fade_at + k] *= np.linspace(1.0, 0.0, k, endpoint=False)
        out[fade_at + k:] = 0.0
    return AudioBuffer(out, fs)


def render_note(event: NoteEvent, params: SynthParams, fs: int = SAMPLE_RATE,
                rng: Optional[np.random.Generator] = None) -> AudioBuffer:
    return render_tone(event.pitch.midi, params, event.duration, fs, rng)


def render_events(events: Sequence[NoteEvent], fs: int = SAMPLE_RATE,
                  rng: Optional[np.random.Generator] = None,
                  return_params: bool = False):
    """Render every note with independently sampled parameters and mix them
    onto a shared timeline at their onsets.

    Per-note randomness comes from child generators seeded up front, so the
    result is independent of any render parallelism; notes are summed in
    input order. The mix is peak-normalized to 0.99 only if it exceeds it.
    """
    if not events:
        raise ValueError("no events to render")
    if rng is None:
        rng = np.random.default_rng(0)
    note_seeds = rng.integers(0, 2 ** 63, size=len(events))
    end_s = max(ev.offset for ev in events)
    timeline = np.zeros(int(round(end_s * fs)) + int(round(TAIL_S * fs)))
    params_list = []
    for ev, seed in zip(events, note_seeds):
        child = np.random.default_rng(int(seed))
        params = sample_params(child)
        note = render_tone(ev.pitch.midi, params, ev.duration, fs, child)
        start = int(round(ev.onset * fs))
        seg = note.samples[: len(timeline) - start]
        timeline[start:start + len(seg)] += seg
        params_list.append(params)
    peak = np.max(np.abs(timeline))
    if peak > 0.99:
        timeline *= 0.99 / peak
    buf = AudioBuffer(timeline, fs)
    return (buf, params_list) if return_params else buf


def render_performance(events: Sequence[NoteEvent], fs: int = SAMPLE_RATE,
                       rng: Optional[np.random.Generator] = None) -> AudioBuffer:
    return render_events(events, fs, rng)

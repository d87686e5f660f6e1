"""Stochastic post-processing chain: distortion, lowpass, highpass,
convolution reverb, and additive noise, each gated independently."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal

from .synthesis import AudioBuffer

# Reverb model: exponentially decaying white noise, T60 and length scaled by
# the room-size knob, mixed at a fixed wet level.
T60_PER_ROOM_S = 1.2
IR_LEN_PER_ROOM_S = 1.0
WET_MIX = 0.3

EFFECT_ORDER = ("distortion", "lowpass", "highpass", "reverb", "noise")


@dataclass(frozen=True)
class AugmentConfig:
    effect_probability: float = 0.5
    drive_db_range: tuple[float, float] = (1.0, 4.0)
    lowpass_hz_range: tuple[float, float] = (1500.0, 8000.0)
    highpass_hz_range: tuple[float, float] = (50.0, 500.0)
    room_size_range: tuple[float, float] = (0.25, 1.0)
    snr_db_range: tuple[float, float] = (30.0, 50.0)

    def __post_init__(self):
        if not 0.0 <= self.effect_probability <= 1.0:
            raise ValueError("effect probability must be in [0, 1]")
        bounds = {
            "drive_db_range": (1.0, 4.0),
            "lowpass_hz_range": (1500.0, 8000.0),
            "highpass_hz_range": (50.0, 500.0),
            "room_size_range": (0.25, 1.0),
            "snr_db_range": (30.0, 50.0),
        }
        for name, (outer_lo, outer_hi) in bounds.items():
            lo, hi = getattr(self, name)
            if not outer_lo <= lo <= hi <= outer_hi:
                raise ValueError(
                    f"{name} {(lo, hi)} outside [{outer_lo}, {outer_hi}]")


def distort(buf: AudioBuffer, drive_db: float) -> AudioBuffer:
    """Soft saturation y = tanh(g x) / tanh(g) with pre-gain g from drive dB."""
    if drive_db < 0:
        raise ValueError("drive must be >= 0 dB")
    g = 10.0 ** (drive_db / 20.0)
    return AudioBuffer(np.tanh(g * buf.samples) / math.tanh(g), buf.sample_rate)


def _butterworth(buf: AudioBuffer, cutoff_hz: float, kind: str) -> AudioBuffer:
    if not 0.0 < cutoff_hz < buf.sample_rate / 2:
        raise ValueError(
            f"cutoff {cutoff_hz} Hz outside (0, {buf.sample_rate / 2})")
    b, a = signal.butter(2, cutoff_hz, btype=kind, fs=buf.sample_rate)
    return AudioBuffer(signal.lfilter(b, a, buf.samples), buf.sample_rate)


def lowpass(buf: AudioBuffer, cutoff_hz: float) -> AudioBuffer:
    return _butterworth(buf, cutoff_hz, "lowpass")


def highpass(buf: AudioBuffer, cutoff_hz: float) -> AudioBuffer:
    return _butterworth(buf, cutoff_hz, "highpass")


def make_impulse_response(room_size: float, fs: int,
                          rng: np.random.Generator) -> np.ndarray:
    """Unit-energy IR: white noise under an exponential decay whose T60 and
    length both scale with room size."""
    n = max(1, int(round(room_size * IR_LEN_PER_ROOM_S * fs)))
    t = np.arange(n) / fs
    envelope = 10.0 ** (-3.0 * t / (room_size * T60_PER_ROOM_S))
    ir = rng.standard_normal(n) * envelope
    return ir / np.sqrt(np.sum(ir ** 2))


def overlap_add_convolve(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Linear convolution via FFT overlap-add; output length len(x)+len(h)-1."""
    x = np.asarray(x, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if len(x) == 0 or len(h) == 0:
        return np.zeros(max(0, len(x) + len(h) - 1))
    block = max(256, 1 << int(math.ceil(math.log2(len(h)))))
    nfft = 1 << int(math.ceil(math.log2(block + len(h) - 1)))
    spectrum_h = np.fft.rfft(h, nfft)
    out = np.zeros(len(x) + len(h) - 1)
    for start in range(0, len(x), block):
        seg = x[start:start + block]
        chunk = np.fft.irfft(np.fft.rfft(seg, nfft) * spectrum_h, nfft)
        stop = min(len(out), start + nfft)
        out[start:stop] += chunk[: stop - start]
    return out


def reverb(buf: AudioBuffer, room_size: float,
           rng: np.random.Generator) -> AudioBuffer:
    if not 0.25 <= room_size <= 1.0:
        raise ValueError(f"room size {room_size} outside [0.25, 1.0]")
    ir = make_impulse_response(room_size, buf.sample_rate, rng)
    wet = overlap_add_convolve(buf.samples, ir)
    dry = np.zeros_like(wet)
    dry[: len(buf.samples)] = buf.samples
    return AudioBuffer((1.0 - WET_MIX) * dry + WET_MIX * wet, buf.sample_rate)


def add_noise(buf: AudioBuffer, snr_db: float,
              rng: np.random.Generator) -> AudioBuffer:
    """Add white noise scaled from its own realized RMS so the output hits
    the requested SNR exactly."""
    signal_rms = buf.rms()
    if signal_rms <= 0.0:
        raise ValueError("SNR undefined for a silent buffer")
    noise = rng.standard_normal(len(buf.samples))
    noise_rms = float(np.sqrt(np.mean(noise ** 2)))
    target_rms = signal_rms / 10.0 ** (snr_db / 20.0)
    return AudioBuffer(buf.samples + noise * (target_rms / noise_rms),
                       buf.sample_rate)


def augment_chain(
    buf: AudioBuffer,
    config: Optional[AugmentConfig],
    rng: np.random.Generator,
) -> tuple[AudioBuffer, list[dict]]:
    """Apply the effect chain in fixed order, each effect firing
    independently with `effect_probability`. Returns the processed buffer
    and a JSON-ready record of what fired with which parameters."""
    cfg = config if config is not None else AugmentConfig()
    applied: list[dict] = []
    out = buf

    if rng.random() < cfg.effect_probability:
        drive_db = float(rng.uniform(*cfg.drive_db_range))
        out = distort(out, drive_db)
        applied.append({"effect": "distortion", "drive_db": drive_db})
    if rng.random() < cfg.effect_probability:
        cutoff = float(rng.uniform(*cfg.lowpass_hz_range))
        out = lowpass(out, cutoff)
        applied.append({"effect": "lowpass", "cutoff_hz": cutoff})
    if rng.random() < cfg.effect_probability:
        cutoff = float(rng.uniform(*cfg.highpass_hz_range))
        out = highpass(out, cutoff)
        applied.append({"effect": "highpass", "cutoff_hz": cutoff})
    if rng.random() < cfg.effect_probability:
        room = float(rng.uniform(*cfg.room_size_range))
        out = reverb(out, room, rng)
        applied.append({"effect": "reverb", "room_size": room})
    if rng.random() < cfg.effect_probability:
        snr_db = float(rng.uniform(*cfg.snr_db_range))
        out = add_noise(out, snr_db, rng)
        applied.append({"effect": "noise", "snr_db": snr_db})
    return out, applied

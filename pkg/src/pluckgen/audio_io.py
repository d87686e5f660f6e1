"""WAV (RIFF PCM16 mono) and standard MIDI file writers/readers."""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .music import NoteEvent
from .synthesis import AudioBuffer

PCM_SCALE = 32767.0
WAV_HEADER_BYTES = 44

TICKS_PER_QUARTER = 480
MIDI_EXPORT_BPM = 120.0


class WavFormatError(ValueError):
    pass


def wav_header(sample_rate: int, n_data_bytes: int) -> bytes:
    """Canonical 44-byte header for mono 16-bit PCM."""
    return struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + n_data_bytes, b"WAVE",
        b"fmt ", 16, 1, 1, sample_rate, sample_rate * 2, 2, 16,
        b"data", n_data_bytes,
    )


def write_wav(buf: AudioBuffer, path: Union[str, Path]) -> None:
    samples = buf.samples
    if len(samples) and np.max(np.abs(samples)) > 1.0:
        raise ValueError("samples must lie in [-1, 1]; normalize first")
    pcm = np.round(samples * PCM_SCALE).astype("<i2")
    data = pcm.tobytes()
    Path(path).write_bytes(wav_header(buf.sample_rate, len(data)) + data)


def read_wav(path: Union[str, Path]) -> AudioBuffer:
    raw = Path(path).read_bytes()
    if len(raw) < WAV_HEADER_BYTES or raw[0:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise WavFormatError(f"{path}: not a RIFF/WAVE file")
    pos = 12
    fmt = None
    data = None
    while pos + 8 <= len(raw):
        chunk_id = raw[pos:pos + 4]
        (size,) = struct.unpack_from("<I", raw, pos + 4)
        body = raw[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise WavFormatError(f"{path}: truncated fmt chunk")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            data = body
        pos += 8 + size + (size & 1)
    if fmt is None or data is None:
        raise WavFormatError(f"{path}: missing fmt or data chunk")
    audio_format, channels, sample_rate, _, _, bits = fmt
    if audio_format != 1 or channels != 1 or bits != 16:
        raise WavFormatError(
            f"{path}: expected mono 16-bit PCM, got format={audio_format} "
            f"channels={channels} bits={bits}")
    samples = np.frombuffer(data, dtype="<i2").astype(np.float64) / PCM_SCALE
    return AudioBuffer(samples, sample_rate)


# ---------------------------------------------------------------------------
# Standard MIDI file export (format 0, single track)
# ---------------------------------------------------------------------------

def _vlq(value: int) -> bytes:
    """MIDI variable-length quantity, 7 bits per byte, big-endian."""
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


def write_midi(events: Sequence[NoteEvent], path: Union[str, Path],
               ticks_per_quarter: int = TICKS_PER_QUARTER,
               tempo_bpm: float = MIDI_EXPORT_BPM) -> None:
    """Format-0 MIDI with one tempo event and a note on/off pair per note."""
    ticks_per_second = ticks_per_quarter * tempo_bpm / 60.0

    # (tick, sort order, message); offs sort before ons at the same tick so
    # repeated pitches re-trigger cleanly.
    messages = []
    for ev in events:
        velocity = max(1, min(127, round(ev.amplitude / 1.5 * 127)))
        on_tick = round(ev.onset * ticks_per_second)
        off_tick = max(on_tick + 1, round(ev.offset * ticks_per_second))
        messages.append((on_tick, 1, bytes((0x90, ev.pitch.midi, velocity))))
        messages.append((off_tick, 0, bytes((0x80, ev.pitch.midi, 64))))
    messages.sort(key=lambda m: (m[0], m[1], m[2]))

    microseconds_per_quarter = round(60_000_000 / tempo_bpm)
    track = bytearray()
    track += _vlq(0) + bytes((0xFF, 0x51, 0x03))
    track += microseconds_per_quarter.to_bytes(3, "big")
    cursor = 0
    for tick, _, msg in messages:
        track += _vlq(tick - cursor) + msg
        cursor = tick
    track += _vlq(0) + bytes((0xFF, 0x2F, 0x00))

    header = struct.pack(">4sIHHH", b"MThd", 6, 0, 1, ticks_per_quarter)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(struct.pack(">4sI", b"MTrk", len(track)))
        fh.write(track)

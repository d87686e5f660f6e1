"""End-to-end dataset generation: compose -> perform -> synthesize ->
augment, with WAV, annotation, and MIDI output plus a reproducibility
manifest."""

from __future__ import annotations

import hashlib
import json
import logging
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from . import __version__
from .audio_io import write_midi, write_wav
from .augmentation import AugmentConfig, augment_chain
from .composer import ComposerConfig, sample_piece
from .music import (
    SAMPLE_RATE,
    NoteEvent,
    Pitch,
    load_pattern_file,
    load_progression_file,
)
from .performance import (
    HumanizeConfig,
    humanize_pitch,
    humanize_timing,
    score_to_events,
)
from .synthesis import render_events

log = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class DatasetSpec:
    clip_count: int
    master_seed: int
    output_dir: str
    composer: ComposerConfig = field(default_factory=ComposerConfig)
    humanize: HumanizeConfig = field(default_factory=HumanizeConfig)
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    augment_enabled: bool = True
    progression_db: Optional[str] = None  # None -> bundled seed database
    pattern_db: Optional[str] = None

    def __post_init__(self):
        if self.clip_count < 1:
            raise ValueError("clip count must be >= 1")


def clip_seed(master_seed: int, index: int) -> int:
    """64-bit splitmix-style hash of (master seed, clip index); gives every
    clip an independent stream regardless of worker scheduling."""
    z = (master_seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


# ---------------------------------------------------------------------------
# Annotations: one JSON object per line, fixed key order, 6-decimal times.
# ---------------------------------------------------------------------------

def _annotation_line(ev: NoteEvent) -> str:
    return (f'{{"onset_s": {ev.onset:.6f}, "offset_s": {ev.offset:.6f}, '
            f'"midi": {ev.pitch.midi}, "string": {ev.string}, '
            f'"fret": {ev.fret}, "amplitude": {ev.amplitude:.6f}}}')


def write_annotations(events: Sequence[NoteEvent], path: Union[str, Path]) -> None:
    ordered = sorted(events, key=lambda e: (e.onset, e.string))
    text = "".join(_annotation_line(ev) + "\n" for ev in ordered)
    Path(path).write_text(text, encoding="utf-8")


def read_annotations(path: Union[str, Path]) -> list[NoteEvent]:
    events = []
    for lineno, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            events.append(NoteEvent(
                onset=float(obj["onset_s"]),
                offset=float(obj["offset_s"]),
                pitch=Pitch(int(obj["midi"])),
                string=int(obj["string"]),
                fret=int(obj["fret"]),
                amplitude=float(obj["amplitude"]),
            ))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{path}:{lineno}: bad annotation record: {exc}") from None
    return events


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------

def _spec_payload(spec: DatasetSpec) -> dict:
    """Generation-relevant spec fields. Output location and worker count are
    excluded so runs into different directories hash identically."""
    progressions_text = _db_text(spec.progression_db, "progressions")
    patterns_text = _db_text(spec.pattern_db, "patterns")
    payload = {
        "clip_count": spec.clip_count,
        "master_seed": spec.master_seed,
        "sample_rate": SAMPLE_RATE,
        "augment_enabled": spec.augment_enabled,
        "composer": asdict(spec.composer),
        "humanize": {
            "max_timing_dev_fraction": spec.humanize.max_timing_dev_fraction,
            "pitch_probs": {str(k): v for k, v in
                            sorted(spec.humanize.pitch_probs.items())},
        },
        "augment": asdict(spec.augment),
        "progressions_sha256": hashlib.sha256(
            progressions_text.encode()).hexdigest(),
        "patterns_sha256": hashlib.sha256(patterns_text.encode()).hexdigest(),
    }
    # canonicalize to JSON-native types (tuples -> lists) so the returned
    # manifest equals its serialized form
    return json.loads(json.dumps(payload))


def _db_text(path: Optional[str], kind: str) -> str:
    if path is not None:
        return Path(path).read_text(encoding="utf-8")
    from .music import _read_data
    return _read_data(f"{kind}.txt")


def _render_clip(spec: DatasetSpec, index: int) -> dict:
    rng = np.random.default_rng(clip_seed(spec.master_seed, index))
    progressions = load_progression_file(spec.progression_db)
    patterns = load_pattern_file(spec.pattern_db)

    score = sample_piece(progressions, patterns, None, spec.composer, rng)
    events = score_to_events(score)
    events = humanize_timing(events, spec.humanize, rng)
    events = humanize_pitch(events, spec.humanize, rng)
    events.sort(key=lambda e: (e.onset, e.string))

    buf, params = render_events(events, SAMPLE_RATE, rng, return_params=True)
    events = [replace(ev, amplitude=p.amplitude)
              for ev, p in zip(events, params)]

    if spec.augment_enabled:
        buf, effects = augment_chain(buf, spec.augment, rng)
        peak = buf.peak()
        if peak > 0.99:
            buf.samples *= 0.99 / peak
    else:
        effects = []

    clip_id = f"clip_{index:06d}"
    out_dir = Path(spec.output_dir)
    wav_name = f"{clip_id}.wav"
    ann_name = f"{clip_id}.jsonl"
    midi_name = f"{clip_id}.mid"
    write_wav(buf, out_dir / wav_name)
    write_annotations(events, out_dir / ann_name)
    write_midi(events, out_dir / midi_name)

    return {
        "clip_id": clip_id,
        "index": index,
        "seed": clip_seed(spec.master_seed, index),
        "wav": wav_name,
        "annotations": ann_name,
        "midi": midi_name,
        "effects": effects,
        "tempo_bpm": score.tempo_bpm,
        "time_signature": [score.time_signature.numerator,
                           score.time_signature.denominator],
        "n_measures": score.n_measures,
        "key_root": score.key_root,
        "pattern": score.pattern_name,
        "progression": score.progression_name,
        "n_notes": len(events),
        "duration_s": buf.duration,
    }


def _render_clip_task(spec: DatasetSpec, index: int) -> tuple[int, dict, Optional[str]]:
    try:
        return index, _render_clip(spec, index), None
    except Exception as exc:  # clip failures are recorded, not fatal
        return index, {}, f"{type(exc).__name__}: {exc}"


def generate_dataset(spec: DatasetSpec, workers: int = 1) -> dict:
    """Generate every clip, write the manifest, and return it.

    Output is a pure function of the spec: identical specs produce
    byte-identical WAVs, annotations, and manifests for any worker count.
    """
    out_dir = Path(spec.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    # Fail before any synthesis if the directory is not writable.
    with tempfile.NamedTemporaryFile(dir=out_dir, prefix=".probe"):
        pass
    payload = _spec_payload(spec)  # also validates that the databases parse

    indices = range(spec.clip_count)
    if workers <= 1:
        results = [_render_clip_task(spec, i) for i in indices]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_render_clip_task,
                                    [spec] * spec.clip_count, indices))

    clips = []
    failures = []
    for index, record, error in sorted(results, key=lambda r: r[0]):
        if error is None:
            clips.append(record)
        else:
            log.warning("clip %d failed: %s", index, error)
            failures.append({"index": index, "error": error})

    manifest = {
        "tool": "pluckgen",
        "version": __version__,
        "spec": payload,
        "spec_hash": hashlib.sha256(
            json.dumps(payload, sort_keys=True).encode()).hexdigest(),
        "clips": clips,
        "failures": failures,
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest

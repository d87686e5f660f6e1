"""Score-to-event conversion and humanization (timing jitter + pitch drift)."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from .music import FRET_MAX, NoteEvent, Pitch, TabScore, midi_of_string_fret

# A note with no successor on its string rings for up to this long.
DEFAULT_SUSTAIN_S = 2.0
# Jittered offsets are kept at least this far past their onset.
MIN_NOTE_LEN_S = 0.001

DEFAULT_PITCH_PROBS: Mapping[int, float] = {0: 0.80, 1: 0.05, -1: 0.05,
                                            2: 0.05, -2: 0.05}


@dataclass(frozen=True)
class HumanizeConfig:
    max_timing_dev_fraction: float = 0.10
    pitch_probs: Mapping[int, float] = field(
        default_factory=lambda: dict(DEFAULT_PITCH_PROBS))

    def __post_init__(self):
        if not 0 <= self.max_timing_dev_fraction < 0.5:
            raise ValueError("timing deviation fraction must be in [0, 0.5)")
        if abs(sum(self.pitch_probs.values()) - 1.0) > 1e-9:
            raise ValueError("pitch shift probabilities must sum to 1")
        if any(p < 0 for p in self.pitch_probs.values()):
            raise ValueError("pitch shift probabilities must be >= 0")


def score_to_events(score: TabScore) -> list[NoteEvent]:
    """Place grid events on the timeline.

    Each 16th slot lasts 60 / (tempo * 4) seconds regardless of meter. A
    note's offset is the onset of the next note on the same string, its
    default sustain, or the end of the piece, whichever comes first.
    """
    spm = score.time_signature.slots_per_measure
    slot_s = 60.0 / (score.tempo_bpm * 4.0)
    end_s = score.n_measures * spm * slot_s

    events: list[NoteEvent] = []
    next_onset: dict[int, Optional[float]] = {s: None for s in range(1, 7)}
    for ev in reversed(score.events):  # events are sorted (measure, slot, ...)
        onset = (ev.measure * spm + ev.slot) * slot_s
        limit = next_onset[ev.string]
        if limit is None:
            limit = end_s
        offset = min(onset + DEFAULT_SUSTAIN_S, limit)
        next_onset[ev.string] = onset
        events.append(NoteEvent(
            onset=onset,
            offset=offset,
            pitch=midi_of_string_fret(ev.string, ev.fret),
            string=ev.string,
            fret=ev.fret,
        ))
    events.sort(key=lambda e: (e.onset, e.string))
    return events


def humanize_timing(
    events: Sequence[NoteEvent],
    config: HumanizeConfig,
    rng: np.random.Generator,
) -> list[NoteEvent]:
    """Jitter onsets and offsets independently, each by at most
    `max_timing_dev_fraction` of the note's nominal duration."""
    f = config.max_timing_dev_fraction
    out = []
    for ev in events:
        bound = f * ev.duration
        onset = max(0.0, ev.onset + float(rng.uniform(-bound, bound)))
        offset = ev.offset + float(rng.uniform(-bound, bound))
        offset = max(offset, onset + MIN_NOTE_LEN_S)
        out.append(replace(ev, onset=onset, offset=offset))
    return out


def humanize_pitch(
    events: Sequence[NoteEvent],
    config: HumanizeConfig,
    rng: np.random.Generator,
) -> list[NoteEvent]:
    """Randomly shift note pitches by whole semitones.

    The fret moves with the pitch so annotations stay playable; a shift that
    would leave the fretboard is skipped and the note kept as written.
    """
    items = sorted(config.pitch_probs.items())
    deltas = np.array([d for d, _ in items])
    probs = np.array([p for _, p in items])
    probs = probs / probs.sum()
    out = []
    for ev in events:
        delta = int(rng.choice(deltas, p=probs))
        fret = ev.fret + delta
        if delta != 0 and 0 <= fret <= FRET_MAX:
            out.append(replace(ev, fret=fret, pitch=Pitch(ev.pitch.midi + delta)))
        else:
            out.append(ev)
    return out

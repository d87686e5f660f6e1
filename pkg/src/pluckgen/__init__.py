"""Procedural fingerpicking guitar dataset generator.

Pipeline: sample a tablature from chord-progression and picking-pattern
databases, humanize it into note events, render plucked-string audio,
augment, and write annotated clips. A note-level P/R/F1 evaluator scores
transcriptions against the emitted annotations.
"""

__version__ = "0.1.0"

from .music import (
    SAMPLE_RATE,
    ChordFingering,
    ChordProgression,
    GridEvent,
    NoteEvent,
    PickPattern,
    Pitch,
    TabScore,
    TimeSignature,
    load_default_patterns,
    load_default_progressions,
    midi_of_string_fret,
    parse_pattern_db,
    parse_progression_db,
    validate_score,
)

__all__ = [
    "SAMPLE_RATE",
    "ChordFingering",
    "ChordProgression",
    "GridEvent",
    "NoteEvent",
    "PickPattern",
    "Pitch",
    "TabScore",
    "TimeSignature",
    "__version__",
    "load_default_patterns",
    "load_default_progressions",
    "midi_of_string_fret",
    "parse_pattern_db",
    "parse_progression_db",
    "validate_score",
]

"""Tablature samplers: the knowledge-based fingerpicking composer and a
greedy random baseline that ignores harmony entirely."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Optional, Sequence

import numpy as np

from .music import (
    FRET_MAX,
    QUALITIES,
    ChordFingering,
    ChordProgression,
    GridEvent,
    PickPattern,
    TabScore,
    TimeSignature,
)

MAJOR_SCALE_OFFSETS = (0, 2, 4, 5, 7, 9, 11)

MAX_PATTERN_RETRIES = 32
MIN_ACTIVE_STRINGS = 4

# Greedy baseline note spacings, in 16th slots: 16th, 8th, quarter, half.
GREEDY_DURATIONS = (1, 2, 4, 8)


class ChordLookupError(ValueError):
    pass


class StringRefError(ValueError):
    pass


class PatternApplicabilityError(ValueError):
    pass


class CompositionError(RuntimeError):
    pass


@dataclass(frozen=True)
class ChordSymbol:
    root_pc: int  # pitch class 0..11, 0 = C
    quality: str

    def __post_init__(self):
        if not 0 <= self.root_pc <= 11:
            raise ValueError(f"root pitch class {self.root_pc} outside 0..11")


@dataclass(frozen=True)
class ComposerConfig:
    tempo_range: tuple[float, float] = (60.0, 160.0)
    measures_per_piece: tuple[int, int] = (8, 16)
    key_choices: tuple[int, ...] = tuple(range(12))
    rng_seed: int = 0

    def __post_init__(self):
        lo, hi = self.tempo_range
        if not (30 <= lo <= hi <= 300):
            raise ValueError(f"tempo range {self.tempo_range} outside 30..300")
        mlo, mhi = self.measures_per_piece
        if not (1 <= mlo <= mhi):
            raise ValueError(f"bad measure range {self.measures_per_piece}")
        if not self.key_choices or any(not 0 <= k <= 11 for k in self.key_choices):
            raise ValueError("key choices must be pitch classes 0..11")


def transpose_progression(prog: ChordProgression, key_root: int) -> list[ChordSymbol]:
    """Map scale degrees to concrete roots in the major key rooted at `key_root`."""
    if not 0 <= key_root <= 11:
        raise ValueError(f"key root {key_root} outside 0..11")
    return [
        ChordSymbol((key_root + MAJOR_SCALE_OFFSETS[deg - 1]) % 12, quality)
        for deg, quality in prog.degrees
    ]


# ---------------------------------------------------------------------------
# Fingering table: open shapes where idiomatic, E-/A-form barres elsewhere.
# Frets are listed for strings 1 (high E) .. 6 (low E); None = muted.
# ---------------------------------------------------------------------------

_OPEN_SHAPES: dict[tuple[int, str], tuple[Optional[int], ...]] = {
    (0, "maj"): (0, 1, 0, 2, 3, None),       # C
    (9, "maj"): (0, 2, 2, 2, 0, None),       # A
    (7, "maj"): (3, 0, 0, 0, 2, 3),          # G
    (4, "maj"): (0, 0, 1, 2, 2, 0),          # E
    (2, "maj"): (2, 3, 2, 0, None, None),    # D
    (9, "min"): (0, 1, 2, 2, 0, None),       # Am
    (4, "min"): (0, 0, 0, 2, 2, 0),          # Em
    (2, "min"): (1, 3, 2, 0, None, None),    # Dm
    (9, "dom7"): (0, 2, 0, 2, 0, None),      # A7
    (4, "dom7"): (0, 0, 1, 0, 2, 0),         # E7
    (2, "dom7"): (2, 1, 2, 0, None, None),   # D7
    (7, "dom7"): (1, 0, 0, 0, 2, 3),         # G7
    (0, "dom7"): (0, 1, 3, 2, 3, None),      # C7
    (11, "dom7"): (2, 0, 2, 1, 2, None),     # B7
    (0, "maj7"): (0, 0, 0, 2, 3, None),      # Cmaj7
    (9, "maj7"): (0, 2, 1, 2, 0, None),      # Amaj7
    (4, "maj7"): (0, 0, 1, 1, 2, 0),         # Emaj7
    (2, "maj7"): (2, 2, 2, 0, None, None),   # Dmaj7
    (7, "maj7"): (2, 0, 0, 0, 2, 3),         # Gmaj7
    (9, "min7"): (0, 1, 0, 2, 0, None),      # Am7
    (4, "min7"): (0, 3, 0, 2, 2, 0),         # Em7
    (2, "min7"): (1, 1, 2, 0, None, None),   # Dm7
}

# Barre templates as offsets from the barre fret; root on string 6 (E form)
# or string 5 (A form).
_E_FORM: dict[str, tuple[Optional[int], ...]] = {
    "maj": (0, 0, 1, 2, 2, 0),
    "min": (0, 0, 0, 2, 2, 0),
    "dom7": (0, 0, 1, 0, 2, 0),
    "maj7": (0, 0, 1, 1, 2, 0),
    "min7": (0, 0, 0, 0, 2, 0),
}
_A_FORM: dict[str, tuple[Optional[int], ...]] = {
    "maj": (0, 2, 2, 2, 0, None),
    "min": (0, 1, 2, 2, 0, None),
    "dom7": (0, 2, 0, 2, 0, None),
    "maj7": (0, 2, 1, 2, 0, None),
    "min7": (0, 1, 0, 2, 0, None),
}
_E_FORM_ROOT_PC = 4   # open E
_A_FORM_ROOT_PC = 9   # open A


def _barre(template: tuple[Optional[int], ...], base: int) -> tuple[Optional[int], ...]:
    return tuple(None if off is None else off + base for off in template)


@lru_cache(maxsize=1)
def default_fingering_table() -> Mapping[tuple[int, str], ChordFingering]:
    table: dict[tuple[int, str], ChordFingering] = {}
    for pc in range(12):
        for quality in QUALITIES:
            shape = _OPEN_SHAPES.get((pc, quality))
            if shape is None:
                fret_e = (pc - _E_FORM_ROOT_PC) % 12
                fret_a = (pc - _A_FORM_ROOT_PC) % 12
                if fret_e <= fret_a:
                    shape = _barre(_E_FORM[quality], fret_e)
                else:
                    shape = _barre(_A_FORM[quality], fret_a)
            table[(pc, quality)] = ChordFingering(shape)
    return table


def chord_lookup(
    symbol: ChordSymbol,
    table: Optional[Mapping[tuple[int, str], ChordFingering]] = None,
) -> ChordFingering:
    if symbol.quality not in QUALITIES:
        raise ChordLookupError(f"unsupported chord quality {symbol.quality!r}")
    table = default_fingering_table() if table is None else table
    try:
        return table[(symbol.root_pc, symbol.quality)]
    except KeyError:
        raise ChordLookupError(
            f"no fingering for root {symbol.root_pc} quality {symbol.quality}"
        ) from None


def resolve_string_ref(fingering: ChordFingering, string_ref: int) -> int:
    """Resolve a signed pattern string reference to a concrete string index.

    Positive refs count down from the highest-pitched active string, negative
    refs count up from the lowest-pitched one; muted strings are skipped.
    """
    if string_ref == 0:
        raise StringRefError("string ref 0 is not allowed")
    actives = fingering.active_strings()
    if abs(string_ref) > len(actives):
        raise StringRefError(
            f"ref {string_ref} exceeds {len(actives)} active strings")
    if string_ref > 0:
        return actives[string_ref - 1]
    return actives[len(actives) + string_ref]


def _check_applicable(pattern: PickPattern,
                      fingerings: Sequence[ChordFingering]) -> None:
    for fingering in fingerings:
        if fingering.active_count < MIN_ACTIVE_STRINGS:
            raise PatternApplicabilityError(
                f"fingering has {fingering.active_count} active strings; "
                f"need at least {MIN_ACTIVE_STRINGS}")
        taken = set()
        for stroke in pattern.strokes:
            try:
                string = resolve_string_ref(fingering, stroke.string_ref)
            except StringRefError as exc:
                raise PatternApplicabilityError(str(exc)) from None
            if (stroke.slot, string) in taken:
                raise PatternApplicabilityError(
                    f"strokes collide at slot {stroke.slot} string {string}")
            taken.add((stroke.slot, string))


def apply_pattern(
    pattern: PickPattern,
    chords: Sequence[ChordSymbol],
    tempo_bpm: float,
    table: Optional[Mapping[tuple[int, str], ChordFingering]] = None,
) -> TabScore:
    """Lay the picking pattern over the chords, one measure per chord."""
    if not chords:
        raise PatternApplicabilityError("no chords to apply the pattern to")
    fingerings = [chord_lookup(c, table) for c in chords]
    _check_applicable(pattern, fingerings)
    events = []
    for measure, fingering in enumerate(fingerings):
        for stroke in pattern.strokes:
            string = resolve_string_ref(fingering, stroke.string_ref)
            events.append(
                GridEvent(measure, stroke.slot, string, fingering.fret_on(string)))
    return TabScore(
        tempo_bpm=tempo_bpm,
        time_signature=pattern.time_signature,
        n_measures=len(chords),
        events=tuple(events),
        pattern_name=pattern.name,
    )


def sample_piece(
    progressions: Sequence[ChordProgression],
    patterns: Sequence[PickPattern],
    table: Optional[Mapping[tuple[int, str], ChordFingering]],
    config: ComposerConfig,
    rng: np.random.Generator,
) -> TabScore:
    """Sample one fingerpicking piece: progression -> key -> fingerings ->
    pattern (resampled while inapplicable) -> tempo -> measure count."""
    if not progressions or not patterns:
        raise CompositionError("empty progression or pattern database")
    prog = progressions[int(rng.integers(len(progressions)))]
    key_root = config.key_choices[int(rng.integers(len(config.key_choices)))]
    symbols = transpose_progression(prog, key_root)
    fingerings = [chord_lookup(s, table) for s in symbols]

    pattern = None
    for _ in range(MAX_PATTERN_RETRIES):
        candidate = patterns[int(rng.integers(len(patterns)))]
        try:
            _check_applicable(candidate, fingerings)
        except PatternApplicabilityError:
            continue
        pattern = candidate
        break
    if pattern is None:
        raise CompositionError(
            f"no applicable pattern after {MAX_PATTERN_RETRIES} attempts "
            f"for progression {prog.name!r}")

    tempo = float(rng.uniform(*config.tempo_range))
    mlo, mhi = config.measures_per_piece
    n_measures = int(rng.integers(mlo, mhi + 1))
    chords = [symbols[i % len(symbols)] for i in range(n_measures)]
    score = apply_pattern(pattern, chords, tempo, table)
    return TabScore(
        tempo_bpm=score.tempo_bpm,
        time_signature=score.time_signature,
        n_measures=score.n_measures,
        events=score.events,
        key_root=key_root,
        pattern_name=pattern.name,
        progression_name=prog.name,
    )


def greedy_generate(
    config: ComposerConfig,
    rng: np.random.Generator,
    time_signature: TimeSignature = TimeSignature(4, 4),
) -> TabScore:
    """Naive baseline: walk each string independently, dropping uniformly
    random frets at uniformly sampled spacings until the piece is full."""
    tempo = float(rng.uniform(*config.tempo_range))
    mlo, mhi = config.measures_per_piece
    n_measures = int(rng.integers(mlo, mhi + 1))
    spm = time_signature.slots_per_measure
    total_slots = n_measures * spm
    events = []
    for string in range(1, 7):
        cursor = 0
        while cursor < total_slots:
            fret = int(rng.integers(0, FRET_MAX + 1))
            events.append(GridEvent(cursor // spm, cursor % spm, string, fret))
            cursor += GREEDY_DURATIONS[int(rng.integers(len(GREEDY_DURATIONS)))]
    return TabScore(
        tempo_bpm=tempo,
        time_signature=time_signature,
        n_measures=n_measures,
        events=tuple(events),
    )

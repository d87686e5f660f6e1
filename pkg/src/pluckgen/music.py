"""Core music types plus the chord-progression and picking-pattern database formats.

Everything assumes a standard-tuned six-string guitar: string 1 is the high E
(MIDI 64) and string 6 the low E (MIDI 40). Rhythm lives on a 16th-note grid,
so a measure of n/d meter has n * 16 / d slots.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from typing import NamedTuple, Optional

SAMPLE_RATE = 16000

# Open-string MIDI numbers for strings 1 (high E) through 6 (low E).
OPEN_STRING_MIDI = (64, 59, 55, 50, 45, 40)

MIDI_MIN = 40  # E2
MIDI_MAX = 88  # E6
FRET_MAX = 19

QUALITIES = ("maj", "min", "dom7", "maj7", "min7")
FINGERS = ("P", "I", "M", "A")
SUPPORTED_METERS = ((4, 4), (3, 4), (6, 8), (12, 8))


class ParseError(ValueError):
    """Malformed database document; carries the 1-based offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ScoreValidationError(ValueError):
    pass


@dataclass(frozen=True)
class TimeSignature:
    numerator: int
    denominator: int

    def __post_init__(self):
        if (self.numerator, self.denominator) not in SUPPORTED_METERS:
            raise ValueError(
                f"unsupported time signature {self.numerator}/{self.denominator}"
            )

    @property
    def slots_per_measure(self) -> int:
        return self.numerator * 16 // self.denominator

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


@dataclass(frozen=True)
class Pitch:
    midi: int

    def __post_init__(self):
        if not MIDI_MIN <= self.midi <= MIDI_MAX:
            raise ValueError(f"midi {self.midi} outside playable range "
                             f"[{MIDI_MIN}, {MIDI_MAX}]")

    @property
    def pitch_class(self) -> int:
        return self.midi % 12


def midi_of_string_fret(string: int, fret: int) -> Pitch:
    """Pitch sounded by fretting `string` (1..6, 1 = high E) at `fret`."""
    if not 1 <= string <= 6:
        raise ValueError(f"string {string} outside 1..6")
    if not 0 <= fret <= FRET_MAX:
        raise ValueError(f"fret {fret} outside 0..{FRET_MAX}")
    return Pitch(OPEN_STRING_MIDI[string - 1] + fret)


@dataclass(frozen=True)
class NoteEvent:
    """One performed note. Times in seconds, amplitude a unitless gain."""

    onset: float
    offset: float
    pitch: Pitch
    string: int
    fret: int
    amplitude: float = 1.0

    def __post_init__(self):
        if self.onset < 0:
            raise ValueError("onset must be >= 0")
        if self.offset <= self.onset:
            raise ValueError("offset must exceed onset")
        if not 1 <= self.string <= 6:
            raise ValueError(f"string {self.string} outside 1..6")
        if not 0 <= self.fret <= FRET_MAX:
            raise ValueError(f"fret {self.fret} outside 0..{FRET_MAX}")
        if self.pitch.midi != OPEN_STRING_MIDI[self.string - 1] + self.fret:
            raise ValueError(
                f"pitch {self.pitch.midi} inconsistent with string "
                f"{self.string} fret {self.fret}")
        if not 0 < self.amplitude <= 1.5:
            raise ValueError(f"amplitude {self.amplitude} outside (0, 1.5]")

    @property
    def duration(self) -> float:
        return self.offset - self.onset


class GridEvent(NamedTuple):
    measure: int
    slot: int
    string: int
    fret: int


class Stroke(NamedTuple):
    slot: int
    finger: str
    string_ref: int


@dataclass(frozen=True)
class PickPattern:
    name: str
    time_signature: TimeSignature
    strokes: tuple[Stroke, ...]

    def __post_init__(self):
        if not self.strokes:
            raise ValueError(f"pattern {self.name!r} has no strokes")
        spm = self.time_signature.slots_per_measure
        for st in self.strokes:
            if st.finger not in FINGERS:
                raise ValueError(f"unknown finger {st.finger!r}")
            if st.string_ref == 0 or abs(st.string_ref) > 6:
                raise ValueError(f"bad string ref {st.string_ref}")
            if not 0 <= st.slot < spm:
                raise ValueError(
                    f"slot {st.slot} outside 0..{spm - 1} for "
                    f"{self.time_signature}")
        object.__setattr__(
            self, "strokes",
            tuple(sorted(self.strokes, key=lambda s: s.slot)))


@dataclass(frozen=True)
class ChordProgression:
    name: str
    degrees: tuple[tuple[int, str], ...]  # (scale degree 1..7, quality)

    def __post_init__(self):
        if not self.degrees:
            raise ValueError(f"progression {self.name!r} is empty")
        for deg, quality in self.degrees:
            if not 1 <= deg <= 7:
                raise ValueError(f"degree {deg} outside 1..7")
            if quality not in QUALITIES:
                raise ValueError(f"unknown quality {quality!r}")


MUTED = None


@dataclass(frozen=True)
class ChordFingering:
    """Fret per string 1..6 (index 0 = string 1); None marks a muted string."""

    frets: tuple[Optional[int], ...]

    def __post_init__(self):
        if len(self.frets) != 6:
            raise ValueError("fingering needs exactly 6 string entries")
        for f in self.frets:
            if f is not None and not 0 <= f <= FRET_MAX:
                raise ValueError(f"fret {f} outside 0..{FRET_MAX}")

    def active_strings(self) -> tuple[int, ...]:
        """String indices with a sounding note, highest-pitched first."""
        return tuple(s for s in range(1, 7) if self.frets[s - 1] is not None)

    @property
    def active_count(self) -> int:
        return len(self.active_strings())

    def fret_on(self, string: int) -> int:
        f = self.frets[string - 1]
        if f is None:
            raise ValueError(f"string {string} is muted")
        return f


@dataclass(frozen=True)
class TabScore:
    """Symbolic piece on the 16th grid. Events are (measure, slot, string, fret)."""

    tempo_bpm: float
    time_signature: TimeSignature
    n_measures: int
    events: tuple[GridEvent, ...]
    # Provenance, filled by the samplers and carried into dataset manifests.
    key_root: Optional[int] = None
    pattern_name: Optional[str] = None
    progression_name: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(sorted(self.events)))
        validate_score(self)


def validate_score(score: TabScore) -> None:
    """Raise ScoreValidationError unless every grid invariant holds."""
    if not 30 <= score.tempo_bpm <= 300:
        raise ScoreValidationError(f"tempo {score.tempo_bpm} outside 30..300")
    if score.n_measures < 1:
        raise ScoreValidationError("score needs at least one measure")
    spm = score.time_signature.slots_per_measure
    seen = set()
    for ev in score.events:
        if not 0 <= ev.measure < score.n_measures:
            raise ScoreValidationError(f"measure {ev.measure} out of range")
        if not 0 <= ev.slot < spm:
            raise ScoreValidationError(
                f"slot {ev.slot} outside 0..{spm - 1} for {score.time_signature}")
        if not 1 <= ev.string <= 6:
            raise ScoreValidationError(f"string {ev.string} outside 1..6")
        if not 0 <= ev.fret <= FRET_MAX:
            raise ScoreValidationError(f"fret {ev.fret} outside 0..{FRET_MAX}")
        key = (ev.measure, ev.slot, ev.string)
        if key in seen:
            raise ScoreValidationError(f"duplicate event at {key}")
        seen.add(key)


# ---------------------------------------------------------------------------
# Score serialization (the `compose` CLI output / `synth` input format)
# ---------------------------------------------------------------------------

def score_to_json(score: TabScore) -> str:
    obj = {
        "tempo_bpm": score.tempo_bpm,
        "time_signature": [score.time_signature.numerator,
                           score.time_signature.denominator],
        "n_measures": score.n_measures,
        "events": [list(ev) for ev in score.events],
        "key_root": score.key_root,
        "pattern": score.pattern_name,
        "progression": score.progression_name,
    }
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def score_from_json(text: str) -> TabScore:
    obj = json.loads(text)
    return TabScore(
        tempo_bpm=float(obj["tempo_bpm"]),
        time_signature=TimeSignature(*obj["time_signature"]),
        n_measures=int(obj["n_measures"]),
        events=tuple(GridEvent(*ev) for ev in obj["events"]),
        key_root=obj.get("key_root"),
        pattern_name=obj.get("pattern"),
        progression_name=obj.get("progression"),
    )


# ---------------------------------------------------------------------------
# Chord-progression database format
#
#   # comment
#   blues_basic: I7 IV7 I7 V7
#
# One record per line. Tokens are roman numerals I..VII with an optional
# quality suffix: (none) = maj, m = min, 7 = dom7, maj7 = maj7, m7 = min7.
# ---------------------------------------------------------------------------

_ROMAN = {"I": 1, "II": 2, "III": 3, "IV": 4, "V": 5, "VI": 6, "VII": 7}
_SUFFIX_TO_QUALITY = {"": "maj", "m": "min", "7": "dom7",
                      "maj7": "maj7", "m7": "min7"}
_QUALITY_TO_SUFFIX = {q: s for s, q in _SUFFIX_TO_QUALITY.items()}
_DEGREE_RE = re.compile(r"^(VII|VI|V|IV|III|II|I)(maj7|m7|7|m)?$")


def parse_degree_token(token: str) -> tuple[int, str]:
    m = _DEGREE_RE.match(token)
    if not m:
        raise ValueError(f"bad degree token {token!r}")
    return _ROMAN[m.group(1)], _SUFFIX_TO_QUALITY[m.group(2) or ""]


def format_degree_token(degree: int, quality: str) -> str:
    numeral = {v: k for k, v in _ROMAN.items()}[degree]
    return numeral + _QUALITY_TO_SUFFIX[quality]


def parse_progression_db(text: str) -> list[ChordProgression]:
    out: list[ChordProgression] = []
    names = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ParseError(lineno, f"expected 'name: tokens', got {raw!r}")
        name, _, rest = line.partition(":")
        name = name.strip()
        if not name:
            raise ParseError(lineno, "missing progression name")
        if name in names:
            raise ParseError(lineno, f"duplicate progression name {name!r}")
        tokens = rest.split()
        if not tokens:
            raise ParseError(lineno, f"progression {name!r} has no chords")
        degrees = []
        for tok in tokens:
            try:
                degrees.append(parse_degree_token(tok))
            except ValueError as exc:
                raise ParseError(lineno, str(exc)) from None
        names.add(name)
        out.append(ChordProgression(name, tuple(degrees)))
    return out


def format_progression_db(progressions: list[ChordProgression]) -> str:
    lines = [
        f"{p.name}: " + " ".join(format_degree_token(d, q) for d, q in p.degrees)
        for p in progressions
    ]
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# Picking-pattern database format
#
#   pattern travis_basic 4/4
#   slot 0 P -1
#   slot 2 M 2
#
# Blocks start at a `pattern` header. Positive string refs count down from
# the highest-pitched active string, negative refs up from the lowest.
# ---------------------------------------------------------------------------

def parse_pattern_db(text: str) -> list[PickPattern]:
    out: list[PickPattern] = []
    names = set()
    header: Optional[tuple[int, str, TimeSignature]] = None
    strokes: list[Stroke] = []
    stroke_keys: set[tuple[int, int]] = set()

    def flush():
        nonlocal header, strokes, stroke_keys
        if header is None:
            return
        lineno, name, ts = header
        if not strokes:
            raise ParseError(lineno, f"pattern {name!r} has no strokes")
        out.append(PickPattern(name, ts, tuple(strokes)))
        header, strokes, stroke_keys = None, [], set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "pattern":
            flush()
            if len(fields) != 3:
                raise ParseError(lineno, "expected 'pattern <name> <num>/<den>'")
            name = fields[1]
            if name in names:
                raise ParseError(lineno, f"duplicate pattern name {name!r}")
            m = re.match(r"^(\d+)/(\d+)$", fields[2])
            if not m:
                raise ParseError(lineno, f"bad time signature {fields[2]!r}")
            try:
                ts = TimeSignature(int(m.group(1)), int(m.group(2)))
            except ValueError as exc:
                raise ParseError(lineno, str(exc)) from None
            names.add(name)
            header = (lineno, name, ts)
        elif fields[0] == "slot":
            if header is None:
                raise ParseError(lineno, "stroke before any pattern header")
            if len(fields) != 4:
                raise ParseError(lineno, "expected 'slot <i> <P|I|M|A> <ref>'")
            try:
                slot = int(fields[1])
                ref = int(fields[3])
            except ValueError:
                raise ParseError(lineno, f"bad stroke numbers in {raw!r}") from None
            finger = fields[2]
            if finger not in FINGERS:
                raise ParseError(lineno, f"unknown finger {finger!r}")
            if ref == 0 or abs(ref) > 6:
                raise ParseError(lineno, f"string ref {ref} outside ±1..±6")
            spm = header[2].slots_per_measure
            if not 0 <= slot < spm:
                raise ParseError(
                    lineno, f"slot {slot} outside 0..{spm - 1} for {header[2]}")
            if (slot, ref) in stroke_keys:
                raise ParseError(
                    lineno, f"duplicate stroke at slot {slot} ref {ref}")
            stroke_keys.add((slot, ref))
            strokes.append(Stroke(slot, finger, ref))
        else:
            raise ParseError(lineno, f"unrecognized line {raw!r}")
    flush()
    return out


def format_pattern_db(patterns: list[PickPattern]) -> str:
    blocks = []
    for p in patterns:
        lines = [f"pattern {p.name} {p.time_signature}"]
        lines += [f"slot {s.slot} {s.finger} {s.string_ref}" for s in p.strokes]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


# ---------------------------------------------------------------------------
# Bundled seed databases
# ---------------------------------------------------------------------------

def _read_data(filename: str) -> str:
    return resources.files("pluckgen").joinpath("data", filename).read_text()


def load_default_progressions() -> list[ChordProgression]:
    return parse_progression_db(_read_data("progressions.txt"))


def load_default_patterns() -> list[PickPattern]:
    return parse_pattern_db(_read_data("patterns.txt"))


def load_progression_file(path: Optional[str]) -> list[ChordProgression]:
    if path is None:
        return load_default_progressions()
    with open(path, encoding="utf-8") as fh:
        return parse_progression_db(fh.read())


def load_pattern_file(path: Optional[str]) -> list[PickPattern]:
    if path is None:
        return load_default_patterns()
    with open(path, encoding="utf-8") as fh:
        return parse_pattern_db(fh.read())

"""Note-level transcription scoring: onset-tolerance matching and P/R/F1."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .music import NoteEvent

MIN_OFFSET_TOLERANCE_S = 0.050


@dataclass(frozen=True)
class MatchConfig:
    onset_tolerance: float = 0.050
    require_offset: bool = False
    offset_ratio: float = 0.2

    def __post_init__(self):
        if self.onset_tolerance <= 0:
            raise ValueError("onset tolerance must be positive")


def _admissible(ref: NoteEvent, est: NoteEvent, config: MatchConfig) -> bool:
    if ref.pitch.midi != est.pitch.midi:
        return False
    if abs(ref.onset - est.onset) > config.onset_tolerance:
        return False
    if config.require_offset:
        tol = max(config.offset_ratio * ref.duration, MIN_OFFSET_TOLERANCE_S)
        if abs(ref.offset - est.offset) > tol:
            return False
    return True


def match_notes(
    reference: Sequence[NoteEvent],
    estimate: Sequence[NoteEvent],
    config: MatchConfig = MatchConfig(),
) -> list[tuple[int, int]]:
    """Maximum-cardinality matching between reference and estimate notes.

    A pair is admissible when pitches are equal and onsets agree within the
    tolerance (plus the offset criterion when enabled). Found by augmenting
    paths, so no admissible pairing of greater size exists.
    """
    candidates = [
        [e for e, est in enumerate(estimate) if _admissible(ref, est, config)]
        for ref in reference
    ]
    est_to_ref: dict[int, int] = {}

    def try_assign(r: int, seen: set[int]) -> bool:
        for e in candidates[r]:
            if e in seen:
                continue
            seen.add(e)
            if e not in est_to_ref or try_assign(est_to_ref[e], seen):
                est_to_ref[e] = r
                return True
        return False

    for r in range(len(reference)):
        try_assign(r, set())
    return sorted((r, e) for e, r in est_to_ref.items())


def prf(
    reference: Sequence[NoteEvent],
    estimate: Sequence[NoteEvent],
    config: MatchConfig = MatchConfig(),
) -> tuple[float, float, float]:
    """Precision, recall, F1. An empty side scores 1.0 against an empty
    counterpart and 0.0 otherwise."""
    matched = len(match_notes(reference, estimate, config))
    if estimate:
        precision = matched / len(estimate)
    else:
        precision = 1.0 if not reference else 0.0
    if reference:
        recall = matched / len(reference)
    else:
        recall = 1.0 if not estimate else 0.0
    f1 = 0.0 if precision + recall == 0 else (
        2.0 * precision * recall / (precision + recall))
    return precision, recall, f1

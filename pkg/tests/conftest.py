"""Shared fixtures and independent test oracles (pitch estimator,
brute-force matcher, direct convolution), plus acceptance-line reporting."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import pytest

from pluckgen.music import OPEN_STRING_MIDI, NoteEvent, Pitch

# ---------------------------------------------------------------------------
# Acceptance criteria reporting: one PASS/FAIL line per criterion at the end
# of the run (see tests/test_acceptance.py).
# ---------------------------------------------------------------------------

ACCEPTANCE_RESULTS: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def record_criterion():
    def _record(number: int, description: str, passed: bool, detail: str = ""):
        ACCEPTANCE_RESULTS.append((number, description, passed, detail))
    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, description, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] criterion {number:2d}: {description}"
        if detail:
            line += f" — {detail}"
        terminalreporter.write_line(line)


# ---------------------------------------------------------------------------
# Event construction helper: map a midi number onto a playable string/fret.
# ---------------------------------------------------------------------------

def note(onset: float, midi: int, duration: float = 0.25,
         amplitude: float = 1.0) -> NoteEvent:
    for string in range(6, 0, -1):
        fret = midi - OPEN_STRING_MIDI[string - 1]
        if 0 <= fret <= 19:
            return NoteEvent(onset=onset, offset=onset + duration,
                             pitch=Pitch(midi), string=string, fret=fret,
                             amplitude=amplitude)
    raise ValueError(f"midi {midi} not playable")


# ---------------------------------------------------------------------------
# Pitch oracle: autocorrelation with octave correction and sub-sample
# refinement at a high multiple of the period. Independent of the synthesis
# path being checked.
# ---------------------------------------------------------------------------

def _peak_near(r, center, radius, lag_lo):
    """Interpolated (lag, value) of the strongest interior local max near
    `center`; value is -inf when the window only contains a flank."""
    a = max(lag_lo, center - radius)
    b = min(len(r) - 2, center + radius)
    if b <= a:
        return float(center), -np.inf
    i = a + int(np.argmax(r[a:b + 1]))
    if r[i] < r[i - 1] or r[i] < r[i + 1]:
        return float(i), -np.inf
    denom = r[i - 1] - 2.0 * r[i] + r[i + 1]
    shift = 0.0
    if denom < 0:
        shift = float(np.clip(0.5 * (r[i - 1] - r[i + 1]) / denom, -0.5, 0.5))
    value = r[i] - 0.25 * (r[i - 1] - r[i + 1]) * shift
    return i + shift, value


def estimate_f0(x, fs, fmin=60.0, fmax=1500.0):
    x = np.asarray(x, dtype=np.float64)
    x = x - x.mean()
    n = len(x)
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(x, nfft)
    r = np.fft.irfft(spec * np.conj(spec))[:n]
    lag_lo = max(2, int(fs / fmax))
    lag_hi = min(n - 2, int(np.ceil(fs / fmin)))
    l0 = lag_lo + int(np.argmax(r[lag_lo:lag_hi + 1]))
    _, v0 = _peak_near(r, l0, 2, lag_lo)

    # The argmax often sits on whichever period multiple lands nearest an
    # integer lag; divide back down to the shortest comparable peak.
    period, value = float(l0), v0
    for m in range(l0 // lag_lo, 1, -1):
        cand = l0 / m
        if cand < lag_lo:
            continue
        lag, v = _peak_near(r, int(round(cand)), 2, lag_lo)
        if v >= 0.80 * v0 and abs(lag * m - l0) < cand / 2:
            period, value = lag, v
            break

    # A clearly stronger peak at twice the period means we locked onto the
    # 2nd harmonic; step down an octave.
    for _ in range(2):
        if 2 * period > min(n // 2, 2 * lag_hi):
            break
        lag, v = _peak_near(r, int(round(2 * period)), 3, lag_lo)
        if v > 1.01 * value and abs(lag - 2 * period) <= 2.0:
            period, value = lag, v
        else:
            break

    # Walk up doubling multiples, re-centering on the current estimate.
    max_lag = min(n // 2, 2500)
    k = 1
    while 2 * k * period <= max_lag:
        k *= 2
        lag, v = _peak_near(r, int(round(k * period)),
                            max(2, int(period / 3)), lag_lo)
        if not np.isfinite(v):
            break
        period = lag / k
    return fs / period


def cents(f_est: float, f_ref: float) -> float:
    return 1200.0 * np.log2(f_est / f_ref)


# ---------------------------------------------------------------------------
# Matching oracle: exhaustive maximum matching by bitmask DP over estimates.
# Admissibility re-derived here, independent of pluckgen.evaluation.
# ---------------------------------------------------------------------------

def brute_force_match_size(reference, estimate, onset_tolerance=0.050):
    admissible = [
        [e for e, est in enumerate(estimate)
         if ref.pitch.midi == est.pitch.midi
         and abs(ref.onset - est.onset) <= onset_tolerance]
        for ref in reference
    ]

    @lru_cache(maxsize=None)
    def best(r: int, used_mask: int) -> int:
        if r == len(reference):
            return 0
        top = best(r + 1, used_mask)
        for e in admissible[r]:
            if not used_mask & (1 << e):
                top = max(top, 1 + best(r + 1, used_mask | (1 << e)))
        return top

    result = best(0, 0)
    best.cache_clear()
    return result


# ---------------------------------------------------------------------------
# Convolution oracle: direct time-domain accumulation, one tap at a time.
# ---------------------------------------------------------------------------

def direct_convolve(x, h):
    x = np.asarray(x, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    out = np.zeros(len(x) + len(h) - 1)
    for k in range(len(h)):
        out[k:k + len(x)] += h[k] * x
    return out

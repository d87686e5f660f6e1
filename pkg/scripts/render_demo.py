#!/usr/bin/env python3
"""Render one demo clip end to end and print what happened at each stage.

Usage: python scripts/render_demo.py [--seed N] [--out DIR]
"""

import argparse
import json
from pathlib import Path

import numpy as np

from pluckgen.audio_io import write_midi, write_wav
from pluckgen.augmentation import AugmentConfig, augment_chain
from pluckgen.composer import ComposerConfig, sample_piece
from pluckgen.dataset import write_annotations
from pluckgen.music import (load_default_patterns, load_default_progressions,
                            score_to_json)
from pluckgen.performance import (HumanizeConfig, humanize_pitch,
                                  humanize_timing, score_to_events)
from pluckgen.synthesis import render_events


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="demo_out")
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)

    score = sample_piece(load_default_progressions(), load_default_patterns(),
                         None, ComposerConfig(), rng)
    print(f"composed: {score.n_measures} measures of {score.time_signature} "
          f"at {score.tempo_bpm:.1f} BPM "
          f"({score.progression_name} x {score.pattern_name}, "
          f"key root {score.key_root})")
    (out / "score.json").write_text(score_to_json(score))

    hcfg = HumanizeConfig()
    events = score_to_events(score)
    events = humanize_pitch(humanize_timing(events, hcfg, rng), hcfg, rng)
    events.sort(key=lambda e: (e.onset, e.string))
    print(f"performed: {len(events)} notes over "
          f"{max(e.offset for e in events):.1f} s")

    buf = render_events(events, rng=rng)
    print(f"rendered: {buf.duration:.1f} s, peak {buf.peak():.3f}")

    buf, effects = augment_chain(buf, AugmentConfig(), rng)
    if buf.peak() > 0.99:
        buf.samples *= 0.99 / buf.peak()
    print("augmented:", ", ".join(e["effect"] for e in effects) or "(nothing fired)")

    write_wav(buf, out / "demo.wav")
    write_annotations(events, out / "demo.jsonl")
    write_midi(events, out / "demo.mid")
    (out / "effects.json").write_text(json.dumps(effects, indent=2) + "\n")
    print(f"wrote {out}/demo.wav, demo.jsonl, demo.mid, score.json")


if __name__ == "__main__":
    main()

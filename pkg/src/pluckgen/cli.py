"""Command-line entry point: compose, generate, synth, augment, evaluate,
inspect. All randomness flows from a single --seed."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional

CONFIG_ENV_VAR = "PLUCKGEN_CONFIG"

log = logging.getLogger("pluckgen")


class UsageError(ValueError):
    """Bad flags, missing files, malformed inputs; exits with status 2."""


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if path is None:
        return {}
    if not Path(path).is_file():
        raise UsageError(f"config file not found: {path}")
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    return cfg


def _pick(flag_value, config: dict, key: str, default):
    """Flags win over the config file, which wins over defaults."""
    if flag_value is not None:
        return flag_value
    return config.get(key, default)


def _require_db(path: Optional[str]) -> Optional[str]:
    if path is not None and not Path(path).is_file():
        raise UsageError(f"database file not found: {path}")
    return path


def _composer_config(args, config: dict):
    from .composer import ComposerConfig

    tempo = _pick(getattr(args, "tempo", None), config, "tempo", None)
    tempo_range = tuple(config.get("tempo_range", (60.0, 160.0)))
    if tempo is not None:
        tempo_range = (float(tempo), float(tempo))
    measures = _pick(getattr(args, "measures", None), config, "measures", None)
    measures_range = tuple(config.get("measures_per_piece", (8, 16)))
    if measures is not None:
        measures_range = (int(measures), int(measures))
    try:
        return ComposerConfig(tempo_range=tempo_range,
                              measures_per_piece=measures_range)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_compose(args) -> int:
    import numpy as np

    from .composer import greedy_generate, sample_piece
    from .music import (ParseError, load_pattern_file, load_progression_file,
                        score_to_json)

    config = _load_config(args.config)
    seed = int(_pick(args.seed, config, "seed", 0))
    composer_cfg = _composer_config(args, config)
    rng = np.random.default_rng(seed)

    if args.composer == "greedy":
        score = greedy_generate(composer_cfg, rng)
    else:
        prog_path = _require_db(_pick(args.progressions, config, "progressions", None))
        pat_path = _require_db(_pick(args.patterns, config, "patterns", None))
        try:
            progressions = load_progression_file(prog_path)
            patterns = load_pattern_file(pat_path)
        except ParseError as exc:
            raise UsageError(f"database parse failure: {exc}") from None
        score = sample_piece(progressions, patterns, None, composer_cfg, rng)

    text = score_to_json(score)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(text)
    return 0


def cmd_generate(args) -> int:
    from .augmentation import AugmentConfig
    from .dataset import DatasetSpec, generate_dataset
    from .music import ParseError

    config = _load_config(args.config)
    count = int(_pick(args.count, config, "count", 10))
    if count < 1:
        raise UsageError("--count must be >= 1")
    seed = int(_pick(args.seed, config, "seed", 0))
    workers = int(_pick(args.workers, config, "workers", 1))
    if workers < 1:
        raise UsageError("--workers must be >= 1")
    effect_probability = float(_pick(None, config, "effect_probability", 0.5))

    spec = DatasetSpec(
        clip_count=count,
        master_seed=seed,
        output_dir=args.out,
        composer=_composer_config(args, config),
        augment=AugmentConfig(effect_probability=effect_probability),
        augment_enabled=not args.no_augment,
        progression_db=_require_db(_pick(args.progressions, config,
                                         "progressions", None)),
        pattern_db=_require_db(_pick(args.patterns, config, "patterns", None)),
    )
    try:
        manifest = generate_dataset(spec, workers=workers)
    except ParseError as exc:
        raise UsageError(f"database parse failure: {exc}") from None
    n_fail = len(manifest["failures"])
    if n_fail:
        log.warning("%d clip(s) failed; see manifest", n_fail)
    print(Path(args.out) / "manifest.json")
    return 0


def cmd_synth(args) -> int:
    import numpy as np

    from .audio_io import write_wav
    from .dataset import write_annotations
    from .music import score_from_json
    from .performance import (HumanizeConfig, humanize_pitch, humanize_timing,
                              score_to_events)
    from .synthesis import render_events

    if not Path(args.score).is_file():
        raise UsageError(f"score file not found: {args.score}")
    try:
        score = score_from_json(Path(args.score).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise UsageError(f"bad score file {args.score}: {exc}") from None

    rng = np.random.default_rng(args.seed)
    events = score_to_events(score)
    if args.humanize:
        hcfg = HumanizeConfig()
        events = humanize_timing(events, hcfg, rng)
        events = humanize_pitch(events, hcfg, rng)
        events.sort(key=lambda e: (e.onset, e.string))
    buf = render_events(events, rng=rng)
    write_wav(buf, args.out)
    log.info("wrote %s (%.2f s)", args.out, buf.duration)
    if args.annotations:
        write_annotations(events, args.annotations)
    return 0


def cmd_augment(args) -> int:
    import numpy as np

    from .audio_io import read_wav, write_wav
    from .augmentation import AugmentConfig, augment_chain

    if not Path(args.input).is_file():
        raise UsageError(f"input file not found: {args.input}")
    buf = read_wav(args.input)
    try:
        cfg = AugmentConfig(effect_probability=args.probability)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out, applied = augment_chain(buf, cfg, np.random.default_rng(args.seed))
    peak = out.peak()
    if peak > 0.99:
        out.samples *= 0.99 / peak
    write_wav(out, args.output)
    print(json.dumps(applied, indent=2))
    return 0


def cmd_evaluate(args) -> int:
    from .dataset import read_annotations
    from .evaluation import MatchConfig, prf

    for path in (args.ref, args.est):
        if not Path(path).is_file():
            raise UsageError(f"annotation file not found: {path}")
    try:
        reference = read_annotations(args.ref)
        estimate = read_annotations(args.est)
    except ValueError as exc:
        raise UsageError(f"malformed annotation file: {exc}") from None
    config = MatchConfig(onset_tolerance=args.onset_tol,
                         require_offset=args.offset)
    precision, recall, f1 = prf(reference, estimate, config)
    print(f"P {precision * 100:.2f} R {recall * 100:.2f} F1 {f1 * 100:.2f}")
    return 0


def cmd_inspect(args) -> int:
    from .dataset import read_annotations

    path = Path(args.path)
    if not path.is_file():
        raise UsageError(f"file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
        is_manifest = isinstance(obj, dict) and "clips" in obj
    except json.JSONDecodeError:
        is_manifest = False

    if is_manifest:
        print(f"manifest: {path}")
        print(f"  tool      {obj.get('tool')} {obj.get('version')}")
        print(f"  spec hash {obj.get('spec_hash')}")
        print(f"  clips     {len(obj['clips'])}")
        print(f"  failures  {len(obj.get('failures', []))}")
        for clip in obj["clips"]:
            effects = ",".join(e["effect"] for e in clip.get("effects", [])) or "-"
            print(f"  {clip['clip_id']}  {clip['n_notes']:4d} notes  "
                  f"{clip['duration_s']:7.2f} s  tempo {clip['tempo_bpm']:6.1f}  "
                  f"{clip.get('pattern') or 'greedy'}  [{effects}]")
    else:
        try:
            events = read_annotations(path)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        print(f"annotations: {path}")
        print(f"  notes   {len(events)}")
        if events:
            midis = [e.pitch.midi for e in events]
            print(f"  span    {events[0].onset:.3f} .. "
                  f"{max(e.offset for e in events):.3f} s")
            print(f"  pitches {min(midis)} .. {max(midis)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pluckgen",
        description="Procedural fingerpicking guitar dataset generator.")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="increase log verbosity (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_db_flags(p):
        p.add_argument("--progressions", metavar="PATH", default=None,
                       help="chord progression database (default: bundled)")
        p.add_argument("--patterns", metavar="PATH", default=None,
                       help="picking pattern database (default: bundled)")
        p.add_argument("--config", metavar="PATH", default=None,
                       help=f"JSON config file (or ${CONFIG_ENV_VAR})")

    p = sub.add_parser("compose", help="sample one tablature to JSON")
    p.add_argument("--out", metavar="PATH", default=None,
                   help="output file (default: stdout)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--composer", choices=("fingerpicking", "greedy"),
                   default="fingerpicking")
    p.add_argument("--measures", type=int, default=None,
                   help="fix the piece length in measures")
    p.add_argument("--tempo", type=float, default=None, help="fix the tempo")
    add_db_flags(p)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("generate", help="generate an annotated audio dataset")
    p.add_argument("--out", metavar="DIR", required=True)
    p.add_argument("--count", type=int, default=None, help="number of clips")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None,
                   help="parallel clip workers (output is identical for any value)")
    p.add_argument("--no-augment", action="store_true",
                   help="skip the augmentation chain")
    p.add_argument("--measures", type=int, default=None)
    p.add_argument("--tempo", type=float, default=None)
    add_db_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("synth", help="render a composed score to WAV")
    p.add_argument("score", metavar="SCORE_JSON")
    p.add_argument("--out", metavar="WAV", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--humanize", action="store_true",
                   help="apply timing/pitch humanization before rendering")
    p.add_argument("--annotations", metavar="PATH", default=None,
                   help="also write the note annotations")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("augment", help="run the effect chain over a WAV file")
    p.add_argument("input", metavar="IN_WAV")
    p.add_argument("output", metavar="OUT_WAV")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--probability", type=float, default=0.5,
                   help="per-effect firing probability")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("evaluate", help="note-level P/R/F1 of est vs ref")
    p.add_argument("--ref", required=True, metavar="ANNOTATIONS")
    p.add_argument("--est", required=True, metavar="ANNOTATIONS")
    p.add_argument("--onset-tol", type=float, default=0.050,
                   help="onset tolerance in seconds (default 0.050)")
    p.add_argument("--offset", action="store_true",
                   help="additionally require offset agreement")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("inspect", help="summarize a manifest or annotation file")
    p.add_argument("path", metavar="PATH")
    p.set_defaults(func=cmd_inspect)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry points.

Offline counterparts of the service pipeline: ``preprocess`` builds a
lesson directory the server can serve as-is, ``score`` compares two
recordings, ``eval`` runs the segmentation evaluation harness, and
``serve`` starts the HTTP service. Machine-readable output goes to
stdout as JSON; human diagnostics go to stderr. Exit codes: 0 success,
1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .audio import decode_wav, resample
from .config import AppConfig, load_config
from .errors import EmptyTargetError, LessonlabError
from .notes import buffer_to_notes
from .pipeline import estimator_from_config, preprocess_lesson
from .scoring import score_performance
from .segeval import CorpusEntry, evaluate_corpus
from .segmentation import Region, segment_lesson
from .separation import load_stems, passthrough_stems
from .pipeline import acquire_stems


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lessonlab", description=__doc__)
    parser.add_argument("--config", help="path to a JSON config file")
    sub = parser.add_subparsers(dest="command", required=True)

    pre = sub.add_parser("preprocess", help="build a lesson directory from audio")
    pre.add_argument("--mix", help="mixed lesson WAV (separator or passthrough)")
    pre.add_argument("--voice", help="pre-separated voice stem WAV")
    pre.add_argument("--instrument", help="pre-separated instrument stem WAV")
    pre.add_argument("--media", help="media file to serve alongside the lesson")
    pre.add_argument("--separator-cmd", help="external separator command template")
    pre.add_argument("--out", required=True, help="output lesson directory")

    score = sub.add_parser("score", help="score a recording against a reference")
    score.add_argument("--reference", required=True)
    score.add_argument("--recording", required=True)

    ev = sub.add_parser("eval", help="evaluate segmentation over a labeled corpus")
    ev.add_argument("--corpus", required=True, help="directory of corpus entries")
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--out", help="directory for report.json/report.txt (default: corpus dir)")

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    serve.add_argument("--storage")
    serve.add_argument("--static-dir")
    return parser


def _notes_for_file(path: str, config: AppConfig):
    buf = resample(decode_wav(Path(path).read_bytes()), config.sample_rate)
    sequence, _ = buffer_to_notes(
        buf,
        f_min=config.f_min,
        f_max=config.f_max,
        min_confidence=config.min_confidence,
        estimator=estimator_from_config(config),
    )
    return sequence


def cmd_preprocess(args, config: AppConfig, parser: argparse.ArgumentParser) -> int:
    has_stems = args.voice is not None and args.instrument is not None
    if args.mix and (args.voice or args.instrument):
        parser.error("give either --mix or --voice/--instrument, not both")
    if not args.mix and not has_stems:
        parser.error("need --mix or both --voice and --instrument")
    if args.separator_cmd:
        config.separator_command = args.separator_cmd
    out_dir = Path(args.out)
    manifest = preprocess_lesson(
        lesson_id=out_dir.name,
        out_dir=out_dir,
        config=config,
        mix_path=args.mix,
        voice_path=args.voice,
        instrument_path=args.instrument,
        media_path=args.media,
    )
    print(f"voice regions: {len(manifest.voice_regions)}", file=sys.stderr)
    print(f"instrument regions: {len(manifest.instrument_regions)}", file=sys.stderr)
    print(
        json.dumps(
            {
                "lesson_id": manifest.lesson_id,
                "out": str(out_dir),
                "duration": round(manifest.duration, 3),
                "voice_regions": len(manifest.voice_regions),
                "instrument_regions": len(manifest.instrument_regions),
            }
        )
    )
    return 0


def cmd_score(args, config: AppConfig) -> int:
    reference = _notes_for_file(args.reference, config)
    recording = _notes_for_file(args.recording, config)
    if len(reference) == 0:
        raise EmptyTargetError("reference audio produced no notes")
    report = score_performance(reference, recording)
    print(json.dumps(report.to_json()))
    return 0


def _truth_regions(path: Path) -> list[Region]:
    entries = json.loads(path.read_text())
    return [
        Region(id=f"truth-{i:03d}", start=e["start"], end=e["end"], track="instrument")
        for i, e in enumerate(entries)
    ]


def cmd_eval(args, config: AppConfig) -> int:
    corpus_dir = Path(args.corpus)
    entries = []
    for entry_dir in sorted(p for p in corpus_dir.iterdir() if p.is_dir()):
        truth_path = entry_dir / "truth.json"
        if not truth_path.exists():
            continue
        if (entry_dir / "voice.wav").exists() and (entry_dir / "instrument.wav").exists():
            stems = load_stems(entry_dir / "voice.wav", entry_dir / "instrument.wav")
        elif (entry_dir / "mix.wav").exists():
            mix = resample(decode_wav((entry_dir / "mix.wav").read_bytes()), config.sample_rate)
            stems = passthrough_stems(mix)
        else:
            continue
        seg = segment_lesson(
            stems,
            window_seconds=config.window_seconds,
            gap_threshold=config.gap_threshold_seconds,
            min_duration=config.min_region_seconds,
            bins=config.histogram_bins,
            smoothing_sigma=config.smoothing_sigma,
            fallback_ratio=config.fallback_threshold_ratio,
        )
        entries.append(
            CorpusEntry(
                name=entry_dir.name,
                predicted=seg.instrument_regions,
                truth=_truth_regions(truth_path),
                duration=stems.instrument.duration,
            )
        )
    if not entries:
        raise LessonlabError(f"no usable corpus entries under {corpus_dir}")
    report = evaluate_corpus(entries, rng_seed=args.seed)
    out_dir = Path(args.out) if args.out else corpus_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(json.dumps(report.to_json(), indent=2))
    (out_dir / "report.txt").write_text(report.format_table() + "\n")
    print(report.format_table(), file=sys.stderr)
    print(json.dumps(report.to_json()))
    return 0


def cmd_serve(args, config: AppConfig) -> int:
    import uvicorn

    from .service import create_app

    if args.host:
        config.host = args.host
    if args.port:
        config.port = args.port
    if args.storage:
        config.storage_root = args.storage
    if args.static_dir:
        config.static_dir = args.static_dir
    uvicorn.run(create_app(config), host=config.host, port=config.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        if args.command == "preprocess":
            return cmd_preprocess(args, config, parser)
        if args.command == "score":
            return cmd_score(args, config)
        if args.command == "eval":
            return cmd_eval(args, config)
        if args.command == "serve":
            return cmd_serve(args, config)
        parser.error(f"unknown command {args.command}")
    except LessonlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

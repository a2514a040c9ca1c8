"""Command line entry point: ``stdc synth|extract|train|score|eval``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import pipeline
from .errors import IoFailure, StdcError
from .metrics import format_report, write_scores


def _config(args) -> pipeline.PipelineConfig:
    return pipeline.load_config(args.config, seed=args.seed, model_dir=args.models)


def cmd_synth(args) -> int:
    spec = pipeline.SynthSpec(count=args.count, duration=args.duration)
    entries = pipeline.synth_corpus(args.out, spec, seed=args.seed or 0)
    print(f"wrote {len(entries)} utterances to {args.out}")
    return 0


def cmd_extract(args) -> int:
    config = _config(args)
    entries, base = pipeline.manifest_with_base(args.manifest)
    ff = pipeline.extract_features(entries, base, config, args.kind)
    pipeline.write_features(args.out, ff)
    print(f"wrote {len(ff.ids)} {args.kind} vectors to {args.out}")
    return 0


def cmd_train(args) -> int:
    config = _config(args)
    entries, base = pipeline.manifest_with_base(args.manifest)
    models = pipeline.train_pipeline(entries, base, config)
    print(f"models written to {models.dir}")
    return 0


def cmd_score(args) -> int:
    config = _config(args)
    entries, base = pipeline.manifest_with_base(args.manifest)
    if args.subset:
        entries = [e for e in entries if e.subset.value == args.subset]
    records = pipeline.score_entries(entries, base, config, args.kind)
    write_scores(args.out, records)
    print(f"wrote {len(records)} scores to {args.out}")
    return 0


def cmd_eval(args) -> int:
    config = _config(args)
    entries, base = pipeline.manifest_with_base(args.manifest)
    reports = pipeline.evaluate(entries, base, config, args.out, args.kind)
    for subset, report in reports.items():
        sys.stdout.write(format_report(report, f"{args.kind} {subset}"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stdc", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, manifest=True):
        if manifest:
            p.add_argument("--manifest", required=True, help="CSV path,label,subset,attack_tag")
        p.add_argument("--config", help="plain-text 'key = value' config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--models", help="model directory (overrides config model_dir)")

    p = sub.add_parser("synth", help="write a synthetic corpus and manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=400)
    p.add_argument("--duration", type=float, default=1.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="write a feature file for every manifest entry")
    common(p)
    p.add_argument("--kind", choices=sorted(pipeline.FEATURE_KINDS), default="sdc")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="run all training stages")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", help="write a utt_id,score,label CSV")
    common(p)
    p.add_argument("--kind", choices=sorted(pipeline.FEATURE_KINDS), default="stdc")
    p.add_argument("--subset", choices=["train", "dev", "eval"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval", help="score dev/eval subsets and report EER")
    common(p)
    p.add_argument("--kind", choices=sorted(pipeline.FEATURE_KINDS), default="stdc")
    p.add_argument("--out", required=True, help="report directory")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except StdcError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"error: {IoFailure.__name__}: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())

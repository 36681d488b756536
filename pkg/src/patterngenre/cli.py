"""Command line entry point: ``patterngenre {extract,classify,export-patterns,report,run,synth}``."""

from __future__ import annotations

import argparse
import logging
import sys

from .metrics import RESULTS_HEADER, read_results, write_results
from .pipeline import RESULTS_FILE, RunConfig, read_store, run_classify, run_export, run_extract
from .synthetic import make_planted_corpus

log = logging.getLogger("patterngenre")

# CLI flag -> RunConfig field
_FLAGS = {
    "algorithm": "algorithm", "preset": "preset", "scheme": "scheme", "tpqn": "common_tpqn",
    "seed": "seed", "workers": "workers", "corpus": "corpus", "annotations": "annotations",
    "mapping": "mapping", "out": "out",
}


def _add_run_flags(p):
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--algorithm", choices=("SIA", "P2"))
    p.add_argument("--preset", help="Sia-1..Sia-4, P2-3..P2-15, or 'none' for explicit thresholds")
    p.add_argument("--scheme", choices=("MAGD", "top-MAGD", "MASD"))
    p.add_argument("--tpqn", type=int, help="common ticks per quarter note (default 6)")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--corpus")
    p.add_argument("--annotations")
    p.add_argument("--mapping")
    p.add_argument("--out")


def _config(args) -> RunConfig:
    overrides = {field: getattr(args, flag, None) for flag, field in _FLAGS.items()}
    if overrides.get("preset") == "none":
        overrides["preset"] = None
        explicit_none = True
    else:
        explicit_none = False
    if args.config:
        cfg = RunConfig.from_file(args.config, **overrides)
    else:
        values = {k: v for k, v in overrides.items() if v is not None}
        if values.get("algorithm") == "SIA" and "preset" not in values:
            values["preset"] = "Sia-1"
        cfg = RunConfig(**values)
    if explicit_none:
        cfg.preset = None
    return cfg


def cmd_extract(args) -> int:
    result = run_extract(_config(args))
    s = result.stats
    print("processed %d files (%d failed), %d instances, %d distinct patterns"
          % (s["files_processed"], s["files_failed"], s["instances"], s["distinct_patterns"]))
    return 0


def cmd_classify(args) -> int:
    cfg = _config(args)
    row = run_classify(cfg, read_store(cfg.out))
    print("\t".join(RESULTS_HEADER))
    print("\t".join(row))
    return 0


def cmd_export(args) -> int:
    cfg = _config(args)
    for path in run_export(cfg, read_store(cfg.out), args.dest):
        print(path)
    return 0


def cmd_report(args) -> int:
    rows = []
    for path in args.results:
        rows.extend(read_results(path))
    rows.sort()
    if args.output:
        write_results(rows, args.output)
    else:
        print("\t".join(RESULTS_HEADER))
        for row in rows:
            print("\t".join(row))
    return 0


def cmd_run(args) -> int:
    cfg = _config(args)
    store = run_extract(cfg)
    run_export(cfg, store)
    row = run_classify(cfg, store)
    print("\t".join(RESULTS_HEADER))
    print("\t".join(row))
    return 0


def cmd_synth(args) -> int:
    for path in make_planted_corpus(args.dest, args.files, args.seed):
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="patterngenre",
                                     description="Repeating-pattern genre classification for MIDI corpora")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract patterns from a MIDI corpus into --out")
    _add_run_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("classify", help="5-fold CV on an extraction in --out")
    _add_run_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("export-patterns", help="write vocabulary.txt and occurrences.tsv")
    _add_run_flags(p)
    p.add_argument("--dest", help="output directory (default OUT/patterns)")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("report", help="merge results tables")
    p.add_argument("results", nargs="+", help="results.tsv files")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("run", help="extract, export and classify in one go")
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("synth", help="write a synthetic corpus with planted genre motifs")
    p.add_argument("dest")
    p.add_argument("--files", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())

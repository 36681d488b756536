"""End-to-end experiment: corpus extraction, occurrence matrix, cross-validated scores."""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import signal
import threading
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .annotations import SCHEMES, load_annotations
from .classifier import cross_validate, save_model, train, label_matrix
from .features import aggregate_counts, export_patterns
from .metrics import results_row, write_results
from .midi import read_midi_file
from .p2 import P2_PRESETS, P2Config, p2_extract
from .patterns import DEFAULT_COMMON_TPQN, canonical_key, serialize_key
from .sia import SIA_PRESETS, SiaConfig, TrackTooLarge, sia_extract

log = logging.getLogger(__name__)

ALGORITHMS = ("SIA", "P2")
MIDI_SUFFIXES = (".mid", ".midi", ".kar")
INSTANCES_FILE = "instances.tsv"
PIECES_FILE = "pieces.txt"
STATS_FILE = "extract_stats.json"
RESULTS_FILE = "results.tsv"
MODEL_FILE = "model.npz"
RUN_LOG = "run.log.jsonl"


@dataclass
class RunConfig:
    algorithm: str = "P2"
    preset: str | None = "P2-5"
    # explicit thresholds, used when ``preset`` is None
    min_length: int = 3
    compactness_min: float = 0.0
    density_min: float = 0.0
    window_length: int = 5
    offset_allowance: int = 3
    similarity_min: float = 0.5
    scheme: str = "top-MAGD"
    common_tpqn: int = DEFAULT_COMMON_TPQN
    seed: int = 0
    workers: int = 1
    reg: float = 1.0
    corpus: str | None = None
    annotations: str | None = None
    mapping: str | None = None
    out: str = "out"
    file_timeout: float = 300.0
    max_file_bytes: int = 16 * 1024 * 1024
    max_track_points: int = 8192

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError("algorithm must be one of %s" % (ALGORITHMS,))
        if self.scheme not in SCHEMES:
            raise ValueError("scheme must be one of %s" % (SCHEMES,))
        if self.preset is not None:
            presets = SIA_PRESETS if self.algorithm == "SIA" else P2_PRESETS
            if self.preset not in presets:
                raise ValueError("unknown %s preset %r; choose from %s"
                                 % (self.algorithm, self.preset, ", ".join(presets)))

    @property
    def name(self) -> str:
        return self.preset or "%s-custom" % self.algorithm

    def extractor(self):
        """The SiaConfig or P2Config this run uses."""
        if self.algorithm == "SIA":
            base = SIA_PRESETS[self.preset] if self.preset else SiaConfig(
                self.min_length, self.compactness_min, self.density_min)
            return dataclasses.replace(base, common_tpqn=self.common_tpqn,
                                       max_points=self.max_track_points)
        base = P2_PRESETS[self.preset] if self.preset else P2Config(
            self.window_length, self.offset_allowance, self.similarity_min)
        return dataclasses.replace(base, common_tpqn=self.common_tpqn)

    @classmethod
    def from_file(cls, path, **overrides) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            values = json.load(fh)
        unknown = set(values) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValueError("%s: unknown config keys %s" % (path, sorted(unknown)))
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class RunLog:
    """Append-only JSON-lines event log."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "a", encoding="utf-8")

    def event(self, kind: str, **fields):
        record = {"event": kind, "time": round(time.time(), 3), **fields}
        self._fh.write(json.dumps(record, sort_keys=True) + "\n")
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class FileTimeout(Exception):
    pass


def _on_alarm(signum, frame):
    raise FileTimeout()


@dataclass
class FileResult:
    piece_id: str
    counts: Counter = field(default_factory=Counter)
    tracks: int = 0
    instances: int = 0
    skipped_tracks: int = 0
    error: str | None = None


def extract_file(path: str, piece_id: str, cfg: RunConfig) -> FileResult:
    """Patterns of one MIDI file, as key counts. Failures are returned, not raised."""
    result = FileResult(piece_id)
    use_alarm = (cfg.file_timeout and hasattr(signal, "setitimer")
                 and threading.current_thread() is threading.main_thread())
    if use_alarm:
        previous = signal.signal(signal.SIGALRM, _on_alarm)
        signal.setitimer(signal.ITIMER_REAL, cfg.file_timeout)
    try:
        if os.path.getsize(path) > cfg.max_file_bytes:
            raise ValueError("file larger than %d bytes" % cfg.max_file_bytes)
        _, tracks = read_midi_file(path, piece_id)
        algo = cfg.extractor()
        extract = sia_extract if cfg.algorithm == "SIA" else p2_extract
        for track in tracks:
            result.tracks += 1
            try:
                instances = extract(track, algo)
            except TrackTooLarge as exc:
                result.skipped_tracks += 1
                log.info("%s track %d skipped: %s", piece_id, track.track_index, exc)
                continue
            memo = {}
            for inst in instances:
                key = memo.get(inst.points)
                if key is None:
                    key = memo[inst.points] = serialize_key(canonical_key(inst, cfg.common_tpqn))
                result.counts[key] += 1
            result.instances += len(instances)
    except FileTimeout:
        result.error = "timed out after %gs" % cfg.file_timeout
    except Exception as exc:  # one bad file must not stop a corpus run
        result.error = "%s: %s" % (type(exc).__name__, exc)
    finally:
        if use_alarm:
            signal.setitimer(signal.ITIMER_REAL, 0)
            signal.signal(signal.SIGALRM, previous)
    if result.error:
        result.counts = Counter()
    return result


def _extract_task(args):
    return extract_file(*args)


def find_midi_files(root) -> list[tuple[str, str]]:
    """(path, piece_id) for every MIDI file under ``root``; ids are relative posix paths."""
    found = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in filenames:
            if name.lower().endswith(MIDI_SUFFIXES):
                path = os.path.join(dirpath, name)
                found.append((path, os.path.relpath(path, root).replace(os.sep, "/")))
    return sorted(found, key=lambda item: item[1])


@dataclass
class ExtractionResult:
    counts: Counter
    pieces: list[str]
    stats: dict


def run_extract(cfg: RunConfig) -> ExtractionResult:
    """Extract patterns from every file of the corpus and store them under ``cfg.out``."""
    if not cfg.corpus or not os.path.isdir(cfg.corpus):
        raise FileNotFoundError("corpus directory not readable: %r" % cfg.corpus)
    files = find_midi_files(cfg.corpus)
    if not files:
        raise ValueError("no MIDI files found under %s" % cfg.corpus)
    os.makedirs(cfg.out, exist_ok=True)
    counts = Counter()
    pieces = []
    failed = {}
    n_instances = skipped_tracks = 0
    tasks = [(path, piece, cfg) for path, piece in files]
    started = time.time()
    with RunLog(os.path.join(cfg.out, RUN_LOG)) as runlog:
        runlog.event("extract_start", files=len(files), config=dataclasses.asdict(cfg))
        if cfg.workers > 1:
            pool = ProcessPoolExecutor(max_workers=cfg.workers)
            results = pool.map(_extract_task, tasks, chunksize=max(1, len(tasks) // (8 * cfg.workers)))
        else:
            pool = None
            results = map(_extract_task, tasks)
        try:
            for res in results:
                if res.error:
                    failed[res.piece_id] = res.error
                    log.warning("%s failed: %s", res.piece_id, res.error)
                    runlog.event("file_failed", piece=res.piece_id, error=res.error)
                    continue
                pieces.append(res.piece_id)
                for key, c in res.counts.items():
                    counts[(res.piece_id, key)] += c
                n_instances += res.instances
                skipped_tracks += res.skipped_tracks
                runlog.event("file_done", piece=res.piece_id, tracks=res.tracks,
                             instances=res.instances, skipped_tracks=res.skipped_tracks)
        finally:
            if pool is not None:
                pool.shutdown()
        stats = {
            "config": cfg.name,
            "algorithm": cfg.algorithm,
            "common_tpqn": cfg.common_tpqn,
            "files_found": len(files),
            "files_processed": len(pieces),
            "files_failed": len(failed),
            "failures": dict(sorted(failed.items())),
            "skipped_tracks": skipped_tracks,
            "instances": n_instances,
            "distinct_patterns": len({k for _, k in counts}),
        }
        runlog.event("extract_done", seconds=round(time.time() - started, 3),
                     **{k: v for k, v in stats.items() if k != "failures"})
    write_store(cfg.out, counts, pieces, stats)
    return ExtractionResult(counts, sorted(pieces), stats)


def write_store(out, counts, pieces, stats) -> None:
    with open(os.path.join(out, INSTANCES_FILE), "w", encoding="utf-8", newline="\n") as fh:
        for (piece, key), c in sorted(counts.items()):
            fh.write("%s\t%s\t%d\n" % (piece, key, c))
    with open(os.path.join(out, PIECES_FILE), "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(p + "\n" for p in sorted(pieces))
    with open(os.path.join(out, STATS_FILE), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(stats, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_store(out) -> ExtractionResult:
    counts = Counter()
    with open(os.path.join(out, INSTANCES_FILE), encoding="utf-8") as fh:
        for line in fh:
            piece, key, c = line.rstrip("\n").split("\t")
            counts[(piece, key)] += int(c)
    with open(os.path.join(out, PIECES_FILE), encoding="utf-8") as fh:
        pieces = [line.rstrip("\n") for line in fh if line.strip()]
    with open(os.path.join(out, STATS_FILE), encoding="utf-8") as fh:
        stats = json.load(fh)
    return ExtractionResult(counts, pieces, stats)


def run_export(cfg: RunConfig, store: ExtractionResult, dest: str | None = None):
    matrix, vocab = aggregate_counts(store.counts, store.pieces)
    return export_patterns(matrix, vocab, dest or os.path.join(cfg.out, "patterns"))


def run_classify(cfg: RunConfig, store: ExtractionResult, annotations=None) -> tuple[str, ...]:
    """Cross-validate on the labeled pieces; write ``results.tsv`` and ``model.npz``."""
    if annotations is None:
        if not (cfg.annotations and cfg.mapping):
            raise ValueError("classification needs --annotations and --mapping")
        annotations = load_annotations(cfg.annotations, cfg.scheme, cfg.mapping)
    labeled = sorted(set(store.pieces) & {p for p, ls in annotations.items() if ls})
    if not labeled:
        raise ValueError("no annotated pieces intersect the extracted corpus")
    matrix, vocab = aggregate_counts(store.counts, store.pieces)
    cv = cross_validate(matrix, annotations, reg=cfg.reg, seed=cfg.seed)
    row = results_row(cfg.name, cfg.scheme, cv.summary, len(vocab))
    write_results([row], os.path.join(cfg.out, RESULTS_FILE))

    data = matrix.select(labeled)
    model = train(data.counts, label_matrix(data.rows, annotations, cv.labels), cv.labels,
                  cfg.reg, vocabulary_digest=vocab.digest())
    save_model(model, os.path.join(cfg.out, MODEL_FILE))
    with RunLog(os.path.join(cfg.out, RUN_LOG)) as runlog:
        runlog.event("classify_done", config=cfg.name, scheme=cfg.scheme, pieces=len(labeled),
                     labels=list(cv.labels), summary=cv.summary, patterns=len(vocab))
    return row

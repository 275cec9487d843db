"""Command-line entry points: ``sesh index``, ``sesh run`` and ``sesh report``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .diagnostics import Diagnostics
from .lmscore import DEFAULT_MU, QueryModel, SmoothingConfig
from .metrics import NoRelevantJudgments, box_stats, by_session_length, evaluate_run, progressing_session
from .oracles import GridConfig, ground_truth_rank, ideal_weights
from .querymodels import METHODS, MethodConfig, NuggetParams, QcmParams, read_anchors, session_model
from .ranker import DEFAULT_FIRST_PASS, CandidateSet, Ranking, RankerConfig, first_pass, read_run, rerank, write_run
from .reference import PUBLISHED_RESULTS
from .sessionlog import Session, parse_qrels, parse_sessions, read_mapping, topic_map_from_sessions
from .textindex import (
    DEFAULT_SPAM_THRESHOLD,
    CorpusFormatError,
    DuplicateDocnoError,
    Index,
    TokenizerConfig,
    build_index,
    load_index,
    read_corpus,
    read_spam_scores,
)

logger = logging.getLogger("sesh")

EXIT_OK, EXIT_MISMATCH, EXIT_IO = 0, 1, 2
ALL_METHODS = METHODS + ("oracle", "grid")

QCM_KEYS = {f"qcm_{f.name}" for f in fields(QcmParams)}
NUGGET_KEYS = {f"nugget_{f.name}" for f in fields(NuggetParams)} - {"nugget_variant"}
GRID_KEYS = {"grid_lo", "grid_hi", "grid_step", "grid_max_terms", "grid_max_assignments"}


class InputError(Exception):
    """Missing or unreadable input; maps to exit code 2."""


def _setup_logging() -> None:
    level = os.environ.get("SESH_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


@dataclass
class ExperimentManifest:
    method: str
    sessions: str
    qrels: str
    out: str
    corpus: Optional[str] = None
    index: Optional[str] = None
    spam: Optional[str] = None
    spam_threshold: int = DEFAULT_SPAM_THRESHOLD
    mapping: Optional[str] = None
    anchors: Optional[str] = None
    mu: float = DEFAULT_MU
    first_pass_n: int = DEFAULT_FIRST_PASS
    params: Dict[str, float] = field(default_factory=dict)
    tag: Optional[str] = None

    def validate(self) -> None:
        if self.method not in ALL_METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {ALL_METHODS}")
        allowed = set()
        if self.method == "qcm":
            allowed = QCM_KEYS
        elif self.method.startswith("nugget"):
            allowed = NUGGET_KEYS
        elif self.method == "grid":
            allowed = GRID_KEYS
        bad = sorted(set(self.params) - allowed)
        if bad:
            raise ValueError(f"parameters {bad} do not apply to method {self.method}")
        if self.index is None and self.corpus is None:
            raise ValueError("either an index or a corpus is required")
        for name in ("sessions", "qrels", "corpus", "index", "spam", "mapping", "anchors"):
            path = getattr(self, name)
            if path is not None and not Path(path).exists():
                raise InputError(f"{name} not found: {path}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentManifest":
        return cls(**json.loads(text))

    @property
    def run_tag(self) -> str:
        return self.tag or self.method

    def method_config(self, anchors=None) -> MethodConfig:
        qcm = QcmParams(**{k[4:]: v for k, v in self.params.items() if k.startswith("qcm_")})
        nugget = NuggetParams(**{k[7:]: v for k, v in self.params.items() if k.startswith("nugget_")})
        return MethodConfig(self.method, qcm=qcm, nugget=nugget, anchors=anchors)

    def grid_config(self) -> GridConfig:
        p = self.params
        return GridConfig(
            lo=p.get("grid_lo", -1.0),
            hi=p.get("grid_hi", 1.0),
            step=p.get("grid_step", 0.1),
            max_unique_terms=int(p.get("grid_max_terms", 7)),
            max_assignments=int(p.get("grid_max_assignments", GridConfig.max_assignments)),
        )


def _load_index(m: ExperimentManifest) -> Index:
    if m.index is not None:
        return load_index(m.index)
    spam = read_spam_scores(m.spam) if m.spam else None
    return build_index(read_corpus(m.corpus), spam, m.spam_threshold)


def _load_judgments(sessions: List[Session], qrels_path: str, mapping_path: Optional[str], report: Diagnostics):
    if mapping_path:
        topic_map, grade_map = read_mapping(mapping_path)
    else:
        topic_map, grade_map = topic_map_from_sessions(sessions) or None, {}
    return parse_qrels(qrels_path, topic_map, grade_map, report)


def _fmt(v: Optional[float]) -> str:
    return "" if v is None else f"{v:.6f}"


def execute_run(m: ExperimentManifest, threads: int = 1, strict: bool = False) -> int:
    """Run one method over every session and write its artifacts to ``m.out``."""
    m.validate()
    report = Diagnostics()
    index = _load_index(m)
    sessions = parse_sessions(Path(m.sessions), index.config, report)
    qrels = _load_judgments(sessions, m.qrels, m.mapping, report)
    anchors = read_anchors(m.anchors) if m.anchors else None
    cfg = RankerConfig(SmoothingConfig(m.mu), m.first_pass_n)
    method = m.method_config(anchors) if m.method in METHODS else None
    grid = m.grid_config() if m.method == "grid" else None

    def process(session: Session):
        try:
            candidates = first_pass(index, session, cfg)
            if m.method == "oracle":
                return ground_truth_rank(candidates, qrels.get(session.session_id, {})), None, None
            if m.method == "grid":
                result = ideal_weights(index, session, candidates, qrels.get(session.session_id, {}), grid, cfg.smoothing)
                return _grid_ranking(index, candidates, result.best_weights, cfg), result, None
            return rerank(index, candidates, session_model(index, session, method), cfg), None, None
        except (ValueError, IndexError, KeyError) as exc:
            return None, None, f"{type(exc).__name__}: {exc}"

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        outcomes = list(pool.map(process, sessions))

    rankings, grid_results = [], []
    for session, (ranking, grid_result, error) in zip(sessions, outcomes):
        if error is not None:
            report.skip(session.session_id, error)
            continue
        rankings.append(ranking)
        if grid_result is not None:
            grid_results.append(grid_result)

    out = Path(m.out)
    out.mkdir(parents=True, exist_ok=True)
    tag = m.run_tag
    (out / "manifest.json").write_text(m.to_json(), encoding="utf-8")
    (out / f"{tag}.run").write_text(write_run(rankings, tag), encoding="utf-8")
    summary = evaluate_run(rankings, qrels, report=report)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["session_id", "ndcg10", "mrr"])
    for r in summary.results:
        writer.writerow([r.session_id, _fmt(r.ndcg_at_10), _fmt(r.mrr)])
    (out / f"{tag}.eval.csv").write_text(buf.getvalue(), encoding="utf-8")
    aggregate = {"method": m.method, "tag": tag, **summary.as_dict(), "skipped_sessions": dict(report.skipped)}
    (out / f"{tag}.summary.json").write_text(json.dumps(aggregate, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if m.method == "grid":
        (out / "grid.json").write_text(
            json.dumps([g.as_dict() for g in grid_results], indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    print(f"{tag}: {len(rankings)} sessions ranked, {len(report.skipped)} skipped; "
          f"NDCG@10={_fmt(summary.mean_ndcg) or 'n/a'} MRR={_fmt(summary.mean_mrr) or 'n/a'}")
    if strict and report.skipped:
        return EXIT_MISMATCH
    return EXIT_OK


def _grid_ranking(index: Index, candidates: CandidateSet, qm: QueryModel, cfg: RankerConfig) -> Ranking:
    if len(qm):
        return rerank(index, candidates, qm, cfg)
    # all-zero weights: every indexed document scores 0
    scores = [(d, 0.0 if d in index else float("-inf")) for d in candidates.docnos]
    return Ranking.from_scores(candidates.session_id, scores)


def cmd_index(args) -> int:
    if not Path(args.corpus).exists():
        print(f"corpus not found: {args.corpus}", file=sys.stderr)
        return EXIT_IO
    spam = None
    if args.spam:
        if not Path(args.spam).exists():
            print(f"spam scores not found: {args.spam}", file=sys.stderr)
            return EXIT_IO
        spam = read_spam_scores(args.spam)
    config = TokenizerConfig(stopwords=args.stopwords, stem=args.stem)
    index = build_index(read_corpus(args.corpus), spam, args.spam_threshold, config)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    index.save(args.out)
    stats = index.stats
    print(f"documents: {stats.num_docs}")
    print(f"terms: {len(stats.coll_freq)} ({stats.total_terms} total)")
    if spam is not None:
        print(f"spam filtered: {index.spam_filtered} (threshold {args.spam_threshold})")
    return EXIT_OK


def _manifest_from_args(args) -> ExperimentManifest:
    if args.manifest:
        m = ExperimentManifest.from_json(Path(args.manifest).read_text(encoding="utf-8"))
        if args.out:
            m.out = args.out
        return m
    missing = [f for f in ("method", "sessions", "qrels", "out") if getattr(args, f) is None]
    if missing:
        raise ValueError(f"missing required flags: {', '.join('--' + f.replace('_', '-') for f in missing)}")
    params = {}
    for key in sorted(QCM_KEYS | NUGGET_KEYS | GRID_KEYS):
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    return ExperimentManifest(
        method=args.method,
        sessions=args.sessions,
        qrels=args.qrels,
        out=args.out,
        corpus=args.corpus,
        index=args.index,
        spam=args.spam,
        spam_threshold=args.spam_threshold,
        mapping=args.mapping,
        anchors=args.anchors,
        mu=args.mu,
        first_pass_n=args.first_pass_n,
        params=params,
        tag=args.tag,
    )


def cmd_run(args) -> int:
    m = _manifest_from_args(args)
    return execute_run(m, threads=args.threads, strict=args.strict)


def _read_tagged_run(path: Path):
    text = path.read_text(encoding="utf-8")
    first = text.split(None, 6)
    tag = first[5] if len(first) >= 6 else path.stem
    return tag, read_run(text)


def cmd_report(args) -> int:
    report = Diagnostics()
    for p in list(args.runs) + [args.qrels, args.sessions] + ([args.mapping] if args.mapping else []):
        if not Path(p).exists():
            raise InputError(f"input not found: {p}")
    index = None
    if args.index or args.corpus:
        index = load_index(args.index) if args.index else build_index(
            read_corpus(args.corpus), read_spam_scores(args.spam) if args.spam else None, args.spam_threshold
        )
    sessions = parse_sessions(Path(args.sessions), index.config if index else TokenizerConfig(), report)
    qrels = _load_judgments(sessions, args.qrels, args.mapping, report)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    evaluated = {}
    for path in args.runs:
        tag, run = _read_tagged_run(Path(path))
        evaluated[tag] = evaluate_run(run, qrels, report=report)
    session_sets = {tag: frozenset(r.session_id for r in s.results) for tag, s in evaluated.items()}
    mismatch = len(set(session_sets.values())) > 1
    if mismatch:
        report.warn("run files cover different session sets: " + ", ".join(f"{t}={len(s)}" for t, s in session_sets.items()))

    rows = [["source", "method", "edition", "ndcg10", "mrr", "sessions"]]
    for tag, summary in evaluated.items():
        rows.append(["local", tag, args.edition, _fmt(summary.mean_ndcg), _fmt(summary.mean_mrr), str(len(summary.results))])
    if args.reference:
        for method, editions in PUBLISHED_RESULTS.items():
            for edition, (nd, rr) in editions.items():
                rows.append(["published", method, edition, f"{nd:.3f}", f"{rr:.3f}", ""])
    _write_csv(out / "table2.csv", rows)

    boxes = {tag: box_stats([r.ndcg_at_10 for r in s.results]).as_dict() for tag, s in evaluated.items() if s.results}
    (out / "fig2_box.json").write_text(json.dumps(boxes, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    rows = [["method", "length", "count", "mean_ndcg10"]]
    for tag, summary in evaluated.items():
        for length, (count, mean) in by_session_length(summary.results, sessions).items():
            rows.append([tag, str(length), str(count), _fmt(mean)])
    _write_csv(out / "fig3_by_length.csv", rows)

    if index is not None:
        cfg = RankerConfig(SmoothingConfig(args.mu), args.first_pass_n)
        anchors = read_anchors(args.anchors) if args.anchors else None
        methods = [t for t in evaluated if t in METHODS]
        rows = _progressing_rows(index, sessions, qrels, methods, args.progress_length, cfg, anchors, report)
        _write_csv(out / "fig4_progressing.csv", rows)
    for tag, summary in evaluated.items():
        print(f"{tag}: NDCG@10={_fmt(summary.mean_ndcg) or 'n/a'} MRR={_fmt(summary.mean_mrr) or 'n/a'} "
              f"({len(summary.results)} sessions)")
    return EXIT_MISMATCH if mismatch else EXIT_OK


def _progressing_rows(index, sessions, qrels, methods, length, cfg, anchors, report) -> List[List[str]]:
    """Mean NDCG@10 difference to TF(last query) after each query, per history mode."""
    chosen = [s for s in sessions if len(s) == length and s.session_id in qrels]
    rows = [["method", "mode", "step", "sessions", "mean_ndcg10", "mean_delta"]]
    for mode in ("full_history", "previous_query_only"):
        baseline = {}
        values = {}
        for s in chosen:
            try:
                baseline[s.session_id] = progressing_session(index, s, MethodConfig("tf_last"), qrels, mode, cfg)
                for method in methods:
                    values[method, s.session_id] = progressing_session(
                        index, s, MethodConfig(method, anchors=anchors), qrels, mode, cfg
                    )
            except NoRelevantJudgments:
                report.skip(s.session_id, "no positively judged documents")
                baseline.pop(s.session_id, None)
        kept = [s.session_id for s in chosen if s.session_id in baseline]
        if not kept:
            continue
        for method in methods:
            for step in range(length):
                vals = [values[method, sid][step] for sid in kept]
                deltas = [values[method, sid][step] - baseline[sid][step] for sid in kept]
                rows.append([method, mode, str(step + 1), str(len(kept)),
                             _fmt(sum(vals) / len(vals)), _fmt(sum(deltas) / len(deltas))])
    return rows


def _write_csv(path: Path, rows) -> None:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sesh", description="Session search query-modeling testbed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build an index file from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--spam")
    p.add_argument("--spam-threshold", type=int, default=DEFAULT_SPAM_THRESHOLD)
    p.add_argument("--out", required=True)
    p.add_argument("--stopwords", action="store_true")
    p.add_argument("--stem", action="store_true")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("run", help="rank every session with one method and evaluate")
    p.add_argument("--manifest")
    p.add_argument("--method", choices=ALL_METHODS)
    p.add_argument("--corpus")
    p.add_argument("--index")
    p.add_argument("--spam")
    p.add_argument("--spam-threshold", type=int, default=DEFAULT_SPAM_THRESHOLD)
    p.add_argument("--sessions")
    p.add_argument("--qrels")
    p.add_argument("--mapping")
    p.add_argument("--anchors")
    p.add_argument("--mu", type=float, default=DEFAULT_MU)
    p.add_argument("--first-pass-n", type=int, default=DEFAULT_FIRST_PASS)
    p.add_argument("--tag")
    for key in sorted(QCM_KEYS | NUGGET_KEYS):
        kind = str if key in ("qcm_source", "nugget_comparator") else (
            int if key in ("nugget_k_snippet", "nugget_k_anchor", "nugget_max_order", "nugget_min_count") else float
        )
        p.add_argument("--" + key.replace("_", "-"), dest=key, type=kind)
    p.add_argument("--grid-lo", dest="grid_lo", type=float)
    p.add_argument("--grid-hi", dest="grid_hi", type=float)
    p.add_argument("--grid-step", dest="grid_step", type=float)
    p.add_argument("--grid-max-terms", dest="grid_max_terms", type=int)
    p.add_argument("--grid-max-assignments", dest="grid_max_assignments", type=int)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out")
    p.add_argument("--strict", action="store_true", help="exit non-zero if any session fails")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="tables and figure data from run files")
    p.add_argument("runs", nargs="+")
    p.add_argument("--qrels", required=True)
    p.add_argument("--sessions", required=True)
    p.add_argument("--mapping")
    p.add_argument("--index")
    p.add_argument("--corpus")
    p.add_argument("--spam")
    p.add_argument("--spam-threshold", type=int, default=DEFAULT_SPAM_THRESHOLD)
    p.add_argument("--anchors")
    p.add_argument("--mu", type=float, default=DEFAULT_MU)
    p.add_argument("--first-pass-n", type=int, default=DEFAULT_FIRST_PASS)
    p.add_argument("--edition", default="local")
    p.add_argument("--progress-length", type=int, default=5)
    p.add_argument("--reference", action="store_true", help="append the published per-edition results")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, FileNotFoundError, CorpusFormatError, DuplicateDocnoError, OSError) as exc:
        print(f"sesh: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"sesh: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

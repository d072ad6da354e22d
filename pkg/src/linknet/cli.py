"""Command-line entry point.

Every subcommand reads a corpus, builds the requested graph variant and
writes CSV (default) or JSON. Outputs open with a metadata header echoing
the configuration, so a run can be repeated exactly. ``--deterministic``
leaves out the timestamp, making repeated runs byte-identical.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import datetime as dt
import io
import json
import logging
import sys
from dataclasses import dataclass, field

import numpy as np

from linknet import __version__
from linknet.corpus import CorpusFormatError, GraphVariant, build_graph, read_corpus
from linknet.global_metrics import global_report
from linknet.graph import default_threads
from linknet.local_metrics import (
    ALL_FEATURES,
    DEFAULT_MAX_ITERS,
    DEFAULT_TOL,
    ConvergenceError,
    Feature,
    ccd,
    compute_features,
)
from linknet.percolation import DEFAULT_TRIALS, TargetedSchedule, breakdown_summary, isolate_run, parse_schedule
from linknet.search import DEFAULT_LIMIT, QueryDropped, read_keywords, run_keyword_suite

log = logging.getLogger("linknet")

UNDEFINED = "undefined"
TOL_NOTE = "iterative features stop when every component moves by at most tol; 1e-16 sits at double round-off, so the default is 1e-12"


@dataclass
class RunConfig:
    command: str
    corpus: str
    variant: str = "all"
    features: list[str] = field(default_factory=list)
    tol: float = DEFAULT_TOL
    max_iters: int = DEFAULT_MAX_ITERS
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    format: str = "csv"
    output: str | None = None
    extra: dict = field(default_factory=dict)

    def echo(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k not in ("extra", "output")}
        out.update(self.extra)
        return out


def fmt(value):
    """CSV cell text: 12 significant digits, ``undefined`` for missing statistics."""
    if value is None:
        return UNDEFINED
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def _json_value(value):
    if value is None:
        return UNDEFINED
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(format(float(value), ".12g"))
    return value


class Emitter:
    def __init__(self, cfg: RunConfig, deterministic: bool, notes: list[str]):
        self.meta = {"tool": "linknet", "version": __version__, "config": cfg.echo(), "notes": notes}
        if not deterministic:
            self.meta["generated"] = dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")
        self.cfg = cfg

    def render(self, columns: list[str], rows: list[list]) -> str:
        if self.cfg.format == "json":
            doc = {
                "metadata": self.meta,
                "columns": columns,
                "rows": [dict(zip(columns, map(_json_value, r))) for r in rows],
            }
            return json.dumps(doc, indent=2, sort_keys=False, ensure_ascii=False) + "\n"
        buf = io.StringIO()
        buf.write(f"# {self.meta['tool']} {self.meta['version']}\n")
        buf.write("# config: " + json.dumps(self.meta["config"], sort_keys=True) + "\n")
        for note in self.meta["notes"]:
            buf.write(f"# note: {note}\n")
        if "generated" in self.meta:
            buf.write(f"# generated: {self.meta['generated']}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows([fmt(v) for v in r] for r in rows)
        return buf.getvalue()

    def write(self, columns, rows):
        text = self.render(columns, rows)
        if self.cfg.output:
            with open(self.cfg.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _features(names: list[str] | None) -> list[Feature]:
    if not names or "all" in names:
        return list(ALL_FEATURES)
    return [Feature.parse(n) for n in names]


def _graph(cfg: RunConfig):
    corpus = read_corpus(cfg.corpus)
    return corpus, build_graph(corpus, GraphVariant(cfg.variant))


def cmd_ingest(args, cfg):
    corpus = read_corpus(cfg.corpus)
    rows = []
    for variant in GraphVariant:
        g = build_graph(corpus, variant)
        rows.append([variant.value, g.n, g.m, corpus.dropped_links])
    return ["variant", "n", "m", "dropped_links"], rows, []


def cmd_global(args, cfg):
    _, g = _graph(cfg)
    row = global_report(g, args.threads).as_row()
    return ["variant"] + list(row), [[cfg.variant] + list(row.values())], []


def cmd_local(args, cfg):
    corpus, g = _graph(cfg)
    feats = _features(cfg.features)
    vecs = compute_features(g, feats, cfg.tol, cfg.max_iters, args.threads)
    rows = [[pid] + [vecs[f].values[i] for f in feats] for i, pid in enumerate(corpus.ids)]
    return ["id"] + [f.value for f in feats], rows, [TOL_NOTE]


def cmd_ccd(args, cfg):
    _, g = _graph(cfg)
    feats = _features(cfg.features)
    vecs = compute_features(g, feats, cfg.tol, cfg.max_iters, args.threads)
    rows = []
    for f in feats:
        table = ccd(vecs[f])
        rows.extend([f.value, z, frac] for z, frac in zip(table.z, table.fraction))
    return ["feature", "z", "F"], rows, [TOL_NOTE]


def cmd_percolate(args, cfg):
    _, g = _graph(cfg)
    names = args.schedule or ["random"]
    if "all" in names:
        names = ["random"] + [f.value for f in ALL_FEATURES]
    schedules = [
        parse_schedule(name, cfg.seed, cfg.trials, args.recompute_every, tol=cfg.tol, max_iters=cfg.max_iters)
        for name in names
    ]
    targeted = [s.feature for s in schedules if isinstance(s, TargetedSchedule)]
    # rank every targeted schedule from one pass over the intact graph
    shared = compute_features(g, targeted, cfg.tol, cfg.max_iters, args.threads) if targeted else None
    traces = [isolate_run(g, s, args.threads, shared) for s in schedules]
    notes = [
        "targeted schedules rank nodes by feature values from the intact graph"
        + (f", re-ranked every {args.recompute_every} isolations" if args.recompute_every else ""),
        "ties in feature value are broken by lowest node index",
        "random schedules average S pointwise over trials; breakdown_fraction is the mean over trials",
        TOL_NOTE,
    ]
    if args.summary:
        return ["schedule", "breakdown_fraction"], [list(r) for r in breakdown_summary(traces)], notes
    rows = [[t.schedule, k, frac, s] for t in traces for k, frac, s in t.points]
    return ["schedule", "isolated_count", "isolated_fraction", "S"], rows, notes


def cmd_search_eval(args, cfg):
    corpus, g = _graph(cfg)
    keywords = read_keywords(args.keywords)
    suite = run_keyword_suite(corpus, g, keywords, args.limit, cfg.tol, cfg.max_iters, args.threads)
    report = suite.drop_report()
    text = json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    if args.drop_report:
        with open(args.drop_report, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stderr.write(text)
    if not suite.curves:
        raise QueryDropped("no keyword produced a relevant set")
    rows = []
    for f in ALL_FEATURES:
        curve = suite.curves[f]
        rows.extend([f.value, x, p, c] for x, p, c in zip(curve.abscissae, curve.precision, curve.counts))
    notes = [
        "keywords match case-insensitively as whole token runs in page title or text",
        "feature-list ties are broken by ascending node index; top ten means list positions 1-10",
        TOL_NOTE,
    ]
    return ["feature", "bucket", "mean_precision", "count"], rows, notes


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linknet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"linknet {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--corpus", required=True, help="newline-delimited JSON corpus file")
    common.add_argument("--variant", choices=[v.value for v in GraphVariant], default="all",
                        help="'all' keeps in-text and see-also links, 'seealso' only see-also links")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--output", "-o", help="output path (default: stdout)")
    common.add_argument("--threads", type=int, default=default_threads(),
                        help="worker threads; results do not depend on this")
    common.add_argument("--deterministic", action="store_true", help="omit the timestamp from the header")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="convergence tolerance for HITS and page rank")
    common.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    common.add_argument("--verbose", "-v", action="store_true")

    feature_help = "feature name or 'all' (repeatable): " + ", ".join(f.value for f in ALL_FEATURES)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("ingest", aliases=["stats"], parents=[common], help="node and edge counts per graph variant")
    p.set_defaults(run=cmd_ingest)
    p = sub.add_parser("global", parents=[common], help="whole-graph statistics")
    p.set_defaults(run=cmd_global)
    for name, func, text in (("local", cmd_local, "per-node feature values"),
                             ("ccd", cmd_ccd, "complementary cumulative distribution of features")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--feature", action="append", help=feature_help)
        p.set_defaults(run=func)
    p = sub.add_parser("percolate", parents=[common], help="node-isolation runs on the giant strong component")
    p.add_argument("--schedule", action="append", help="'random', a feature name, or 'all' (repeatable)")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--recompute-every", type=int, default=None, metavar="K",
                   help="re-rank targeted schedules on the damaged graph every K isolations")
    p.add_argument("--summary", action="store_true", help="emit breakdown fractions instead of full traces")
    p.set_defaults(run=cmd_percolate)
    p = sub.add_parser("search-eval", parents=[common], help="Precision-Recall of feature-ranked keyword search")
    p.add_argument("--keywords", required=True, help="keyword file, one per line in rank order")
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    p.add_argument("--drop-report", help="write the JSON drop report here (default: stderr)")
    p.set_defaults(run=cmd_search_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    cfg = RunConfig(
        command=args.command,
        corpus=args.corpus,
        variant=args.variant,
        features=getattr(args, "feature", None) or [],
        tol=args.tol,
        max_iters=args.max_iters,
        trials=getattr(args, "trials", DEFAULT_TRIALS),
        seed=getattr(args, "seed", 0),
        format=args.format,
        output=args.output,
    )
    for key in ("schedule", "recompute_every", "summary", "keywords", "limit"):
        if hasattr(args, key):
            cfg.extra[key] = getattr(args, key)
    try:
        columns, rows, notes = args.run(args, cfg)
        Emitter(cfg, args.deterministic, notes).write(columns, rows)
    except (CorpusFormatError, ConvergenceError, QueryDropped, ValueError, OSError) as exc:
        print(f"linknet: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    with contextlib.suppress(BrokenPipeError):
        sys.exit(main())

"""Command-line entry point: ``sociosem <subcommand> [--config FILE] [--key value ...]``.

Every configuration key can be given in a JSON config file (or a previous
run's ``manifest.json``) and overridden by a flag of the same name.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from collections import Counter
from pathlib import Path

from .exceptions import InputError, SociosemError
from .pipeline import Analysis, RunConfig, write_manifest, write_synthetic
from .synth import SynthConfig, generate
from .tables import Table

logger = logging.getLogger("sociosem")

SUBCOMMANDS = ("ingest", "corpus-stats", "actor-metrics", "actor-correlations", "network", "similarity",
               "qap", "qap-groups", "mrqap", "synth", "report")


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _optional_str(text: str) -> str | None:
    return None if text.lower() in ("", "none", "null") else text


def _json_list(text: str) -> list:
    value = json.loads(text)
    if not isinstance(value, list):
        raise argparse.ArgumentTypeError("expected a JSON list")
    return value


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    defaults = RunConfig()
    for f in dataclasses.fields(RunConfig):
        default = getattr(defaults, f.name)
        if isinstance(default, bool):
            kind = _bool
        elif isinstance(default, int):
            kind = int
        elif isinstance(default, float):
            kind = float
        elif isinstance(default, list):
            kind = _json_list
        else:
            kind = _optional_str
        parser.add_argument(f"--{f.name}", type=kind, default=argparse.SUPPRESS, metavar=f.name.upper())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sociosem", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file or a manifest.json from a previous run")
        p.add_argument("-v", "--verbose", action="store_true")
        _add_config_flags(p)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    data = {}
    if args.config:
        path = Path(args.config)
        try:
            raw = json.loads(path.read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {path}: {exc}") from None
        data = dict(raw.get("config", raw))
    names = {f.name for f in dataclasses.fields(RunConfig)}
    data.update({k: v for k, v in vars(args).items() if k in names})
    return RunConfig.from_dict(data)


def _write(outdir: Path, files: list[str], table: Table, stem: str, markdown: bool = True) -> None:
    table.write(outdir, stem, markdown)
    files.append(f"{stem}.csv")
    if markdown:
        files.append(f"{stem}.md")


def cmd_ingest(a: Analysis, out: Path, files: list[str]) -> None:
    from .corpus import write_authors, write_posts

    out.mkdir(parents=True, exist_ok=True)
    write_posts(a.corpus, out / "posts.jsonl")
    write_authors(a.corpus, out / "authors.csv")
    files += ["posts.jsonl", "authors.csv"]
    t = Table(["statistic", "value"])
    t.add_row(["posts", len(a.corpus)])
    t.add_row(["authors", len(a.corpus.actors)])
    _write(out, files, t, "ingest_summary", markdown=False)


def cmd_corpus_stats(a, out, files):
    _write(out, files, a.table_corpus_stats(), "table1_corpus_stats")


def cmd_actor_metrics(a, out, files):
    _write(out, files, a.table_actor_values(), "actor_values", markdown=False)
    _write(out, files, a.table_descriptives(), "table2_descriptives")


def cmd_actor_correlations(a, out, files):
    display, long = a.table_actor_correlations()
    _write(out, files, display, "table3_actor_correlations")
    _write(out, files, long, "actor_correlations_full", markdown=False)


def cmd_network(a, out, files):
    _write(out, files, a.graph.edge_table(), "edges", markdown=False)
    _write(out, files, a.centrality.to_table(), "centrality", markdown=False)
    from .network import graph_stats

    _write(out, files, graph_stats(a.graph).to_table(), "graph_stats", markdown=False)
    dist = Counter(a.centrality.degree.values())
    t = Table(["degree", "count"])
    for d in sorted(dist):
        t.add_row([d, dist[d]])
    _write(out, files, t, "degree_distribution", markdown=False)
    _write(out, files, a.table_factor(), "centrality_factor", markdown=False)


def cmd_similarity(a, out, files):
    mdir = out / "matrices"
    mdir.mkdir(parents=True, exist_ok=True)
    for name, m in a.matrices.items():
        m.write_csv(mdir / f"{name}.csv")
        files.append(f"matrices/{name}.csv")


def cmd_qap(a, out, files):
    display, long = a.table_qap()
    _write(out, files, display, "table4_qap")
    _write(out, files, long, "qap_full", markdown=False)


def cmd_qap_groups(a, out, files):
    display, long = a.table_qap_groups()
    _write(out, files, display, "table5_qap_groups")
    _write(out, files, long, "qap_groups_full", markdown=False)


def cmd_mrqap(a, out, files):
    from .dyadstats import models_table

    _write(out, files, a.table_vif(), "vif", markdown=False)
    results = a.models()
    _write(out, files, models_table(results), "table6_mrqap")
    for i, r in enumerate(results, start=1):
        if r is not None:
            _write(out, files, r.to_table(), f"mrqap_model{i}_full", markdown=False)


def cmd_report(a, out, files):
    for step in (cmd_corpus_stats, cmd_actor_metrics, cmd_actor_correlations, cmd_network,
                 cmd_similarity, cmd_qap, cmd_qap_groups, cmd_mrqap):
        step(a, out, files)
    hist = Table(["table", "var1", "var2", "p_value"])
    for stem in ("qap_full", "qap_groups_full"):
        t = Table.from_csv((out / f"{stem}.csv").read_text("utf-8"))
        for row in t.rows:
            hist.add_row([stem, row[0], row[1], row[3]])
    _write(out, files, hist, "qap_pvalues", markdown=False)


def cmd_synth(cfg: RunConfig, out: Path, files: list[str]) -> None:
    sc = SynthConfig(n_actors=cfg.synth_n_actors, n_vocab_clusters=cfg.synth_n_vocab_clusters,
                     words_per_cluster=cfg.synth_words_per_cluster, posts_per_actor=cfg.synth_posts_per_actor,
                     beta_text=cfg.synth_beta_text, beta_centrality=cfg.synth_beta_centrality,
                     noise_scale=cfg.synth_noise_scale, n_weeks=cfg.synth_n_weeks, seed=cfg.seed)
    corpus, truth = generate(sc)
    files += write_synthetic(corpus, truth, out)


COMMANDS = {
    "ingest": cmd_ingest, "corpus-stats": cmd_corpus_stats, "actor-metrics": cmd_actor_metrics,
    "actor-correlations": cmd_actor_correlations, "network": cmd_network, "similarity": cmd_similarity,
    "qap": cmd_qap, "qap-groups": cmd_qap_groups, "mrqap": cmd_mrqap, "report": cmd_report,
}


def run(subcommand: str, cfg: RunConfig) -> list[str]:
    """Execute one subcommand and write its manifest; returns the files written."""
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    files: list[str] = []
    if subcommand == "synth":
        cmd_synth(cfg, out, files)
    else:
        analysis = Analysis(cfg)
        COMMANDS[subcommand](analysis, out, files)
        if analysis.warnings:
            (out / "warnings.txt").write_text("\n".join(analysis.warnings) + "\n", "utf-8")
            files.append("warnings.txt")
    write_manifest(cfg, subcommand, out, files)
    return files


def _error_record(exc: BaseException, code: int) -> dict:
    return {"error": type(exc).__name__, "message": str(exc), "exit_code": code}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        run(args.subcommand, resolve_config(args))
    except SociosemError as exc:
        record = _error_record(exc, exc.exit_code)
    except (OSError, ValueError, KeyError) as exc:
        record = _error_record(exc, 2)
    except Exception as exc:  # noqa: BLE001 - reported as an internal error record
        logger.exception("internal error")
        record = _error_record(exc, 4)
    else:
        return 0
    print(json.dumps(record), file=sys.stderr)
    return record["exit_code"]


if __name__ == "__main__":
    sys.exit(main())

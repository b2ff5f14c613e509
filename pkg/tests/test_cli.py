import json
import math
import re

import numpy as np
import pytest

from sociosem import cli
from sociosem.pipeline import RunConfig, actor_correlations, pearson_test
from sociosem.tables import Table

SMALL = ["--permutations", "49", "--blocks", '[["text","length"],["gender"]]', "--extra_models", "[]"]


@pytest.fixture
def mini_args(data_dir):
    return ["--posts", str(data_dir / "mini_posts.jsonl"), "--authors", str(data_dir / "mini_authors.csv")]


@pytest.mark.parametrize("sub, expected", [
    ("ingest", ["posts.jsonl", "authors.csv", "ingest_summary.csv"]),
    ("corpus-stats", ["table1_corpus_stats.csv", "table1_corpus_stats.md"]),
    ("actor-metrics", ["actor_values.csv", "table2_descriptives.md"]),
    ("actor-correlations", ["table3_actor_correlations.md", "actor_correlations_full.csv"]),
    ("network", ["edges.csv", "centrality.csv", "graph_stats.csv", "degree_distribution.csv",
                 "centrality_factor.csv"]),
    ("similarity", ["matrices/text.csv", "matrices/interaction.csv", "matrices/gender.csv"]),
    ("qap", ["table4_qap.md", "qap_full.csv"]),
    ("qap-groups", ["table5_qap_groups.md", "qap_groups_full.csv"]),
    ("mrqap", ["table6_mrqap.md", "vif.csv", "mrqap_model1_full.csv"]),
])
def test_subcommands_write_outputs(sub, expected, mini_args, tmp_path):
    assert cli.main([sub, *mini_args, *SMALL, "--output", str(tmp_path)]) == 0
    for name in expected:
        assert (tmp_path / name).exists(), name
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["subcommand"] == sub
    assert manifest["seed"] == 0
    assert set(manifest["inputs"]) == {"posts", "authors"}
    assert "n_jobs" not in manifest["config"] and "output" not in manifest["config"]
    assert manifest["config"]["log_base"] == "e" and manifest["config"]["idf"] == "smooth"


def test_corpus_stats_formatting(mini_args, tmp_path):
    cli.main(["corpus-stats", *mini_args, "--output", str(tmp_path)])
    rows = dict(Table.from_csv((tmp_path / "table1_corpus_stats.csv").read_text()).rows)
    assert rows["Number of posts"] == "20"
    assert re.fullmatch(r"\d+\.\d\d%", rows["Type-Token Ratio"])
    assert re.fullmatch(r"\d+\.\d\d%", rows["Hapax-Type Ratio"])


def test_network_outputs_match_manifest(mini_args, tmp_path, mini_manifest):
    cli.main(["network", *mini_args, "--output", str(tmp_path)])
    edges = Table.from_csv((tmp_path / "edges.csv").read_text())
    assert sorted([u, v, int(w)] for u, v, w in edges.rows) == sorted(mini_manifest["edges_preceding"])


def test_report_rerun_from_manifest_byte_identical(mini_args, tmp_path):
    first = tmp_path / "first"
    assert cli.main(["report", *mini_args, *SMALL, "--output", str(first)]) == 0
    again = tmp_path / "again"
    assert cli.main(["report", "--config", str(first / "manifest.json"), "--output", str(again)]) == 0
    parallel = tmp_path / "parallel"
    assert cli.main(["report", "--config", str(first / "manifest.json"), "--output", str(parallel),
                     "--n_jobs", "2"]) == 0
    files = sorted(p.relative_to(first) for p in first.rglob("*") if p.is_file())
    assert len(files) > 20
    for rel in files:
        assert (first / rel).read_bytes() == (again / rel).read_bytes(), rel
        assert (first / rel).read_bytes() == (parallel / rel).read_bytes(), rel


def test_report_tables_round_trip(mini_args, tmp_path):
    cli.main(["report", *mini_args, *SMALL, "--output", str(tmp_path)])
    csvs = [p for p in tmp_path.rglob("*.csv") if p.parent == tmp_path]
    assert len(csvs) > 10
    for path in csvs:
        text = path.read_text("utf-8")
        assert Table.from_csv(text).to_csv() == text, path.name


def test_report_warnings_recorded(mini_args, tmp_path):
    cli.main(["report", *mini_args, *SMALL, "--output", str(tmp_path)])
    warnings = (tmp_path / "warnings.txt").read_text()
    assert "Content Managers" in warnings


def test_config_file_and_flag_override(mini_args, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"permutations": 19, "seed": 5, "interaction_rule": "opener"}))
    out = tmp_path / "out"
    assert cli.main(["network", "--config", str(cfg), *mini_args, "--seed", "7", "--output", str(out)]) == 0
    m = json.loads((out / "manifest.json").read_text())["config"]
    assert (m["permutations"], m["seed"], m["interaction_rule"]) == (19, 7, "opener")


def test_every_config_key_has_a_flag():
    parser = cli.build_parser()
    sub = parser._subparsers._group_actions[0].choices["report"]
    flags = {a.dest for a in sub._actions}
    assert set(RunConfig().analytic()) | {"output", "n_jobs"} <= flags


def error_record(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_input_error_exit_code(tmp_path, capsys):
    code = cli.main(["corpus-stats", "--posts", str(tmp_path / "missing.jsonl"), "--output", str(tmp_path)])
    assert code == 2
    rec = error_record(capsys)
    assert rec["exit_code"] == 2 and rec["error"]


def test_schema_error_exit_code(tmp_path, capsys):
    posts = tmp_path / "p.jsonl"
    posts.write_text('{"post_id": "p1", "author_id": "a"}\n')
    assert cli.main(["corpus-stats", "--posts", str(posts), "--output", str(tmp_path)]) == 2
    assert error_record(capsys)["error"] == "SchemaError"


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"permutatons": 5}')
    assert cli.main(["corpus-stats", "--config", str(cfg), "--output", str(tmp_path)]) == 2
    assert "permutatons" in error_record(capsys)["message"]


def test_numerical_error_exit_code(tmp_path, capsys):
    posts = tmp_path / "p.jsonl"
    posts.write_text('{"post_id": "p1", "author_id": "a", "thread_id": "t", "week": 0, "text": "ciao mondo"}\n')
    assert cli.main(["similarity", "--posts", str(posts), "--output", str(tmp_path)]) == 3
    assert error_record(capsys)["error"] == "NotEnoughActors"


def test_internal_error_exit_code(monkeypatch, mini_args, tmp_path, capsys):
    def boom(*args):
        raise RuntimeError("unexpected")

    monkeypatch.setitem(cli.COMMANDS, "corpus-stats", boom)
    assert cli.main(["corpus-stats", *mini_args, "--output", str(tmp_path)]) == 4
    assert error_record(capsys) == {"error": "RuntimeError", "message": "unexpected", "exit_code": 4}


def test_synth_then_report(tmp_path):
    synth = tmp_path / "synth"
    assert cli.main(["synth", "--synth_n_actors", "40", "--seed", "3", "--output", str(synth)]) == 0
    out = tmp_path / "report"
    assert cli.main(["report", "--posts", str(synth / "posts.jsonl"), "--authors", str(synth / "authors.csv"),
                     "--permutations", "99", "--output", str(out)]) == 0
    qap = Table.from_csv((out / "qap_full.csv").read_text())
    text = next(r for r in qap.rows if r[0] == "text" and r[1] == "interaction")
    assert float(text[2]) > 0 and float(text[3]) < 0.05
    table6 = Table.from_csv((out / "table6_mrqap.csv").read_text())
    assert table6.columns == ["predictor", "Model 1", "Model 2", "Model 3", "Model 4", "Model 5"]
    assert next(r for r in table6.rows if r[0] == "text")[1].endswith("*")


def test_actor_correlations_against_pearson_oracle():
    rng = np.random.default_rng(0)
    cols = {"x": rng.normal(size=30), "y": rng.normal(size=30), "c": np.ones(30)}
    cols["y"][3] = np.nan
    display, long = actor_correlations(cols)
    assert display.rows[0][1] == "1"
    rows = {(r[0], r[1]): r for r in long.rows}
    ok = ~np.isnan(cols["y"])
    x, y = cols["x"][ok], cols["y"][ok]
    mx, my = sum(x) / len(x), sum(y) / len(y)
    oracle = sum((a - mx) * (b - my) for a, b in zip(x, y)) / math.sqrt(
        sum((a - mx) ** 2 for a in x) * sum((b - my) ** 2 for b in y))
    assert float(rows[("y", "x")][2]) == pytest.approx(oracle, abs=1e-12)
    assert rows[("y", "x")][4] == "29"
    assert rows[("c", "x")][2] == "" and display.rows[2][1] == "NA"
    r, p, n = pearson_test(cols["x"], cols["x"])
    assert r == 1.0 and p == 0.0 and n == 30

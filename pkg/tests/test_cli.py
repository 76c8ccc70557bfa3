import csv
import io
import json
import random

import pytest

from obda_rewrite import cli
from obda_rewrite.cli import (
    EXIT_CAP,
    EXIT_MISMATCH,
    EXIT_OK,
    EXIT_USAGE,
    bench_growth,
    fit_exponent,
    main,
    replay,
    trial_rng,
    verify_random,
)
from obda_rewrite.randgen import TrialConfig, random_instance
from obda_rewrite.textio import parse_formula, parse_hypergraph, parse_ndl

from conftest import EX1_ONTOLOGY, EX1_QUERY


@pytest.fixture
def ex1_files(tmp_path):
    o, q, d = tmp_path / "ex1.tgd", tmp_path / "ex1.cq", tmp_path / "ex1.facts"
    o.write_text(EX1_ONTOLOGY)
    q.write_text(EX1_QUERY + "\n")
    d.write_text("A1(a)\nR2(b,a)\n")
    return str(o), str(q), str(d)


def test_rewrite_tw_pe(ex1_files, tmp_path, capsys):
    o, q, _ = ex1_files
    out = tmp_path / "r.fo"
    assert main(["rewrite", "--ontology", o, "--query", q, "-o", str(out)]) == EXIT_OK
    f = parse_formula(out.read_text())
    assert len(f.items) == 3


def test_rewrite_ndl_with_trace(ex1_files, tmp_path):
    o, q, _ = ex1_files
    out, tr = tmp_path / "r.ndl", tmp_path / "trace.json"
    assert main(["rewrite", "--mode", "ndl", "--ontology", o, "--query", q, "-o", str(out), "--trace", str(tr)]) == EXIT_OK
    parse_ndl(out.read_text()).validate()
    trace = json.loads(tr.read_text())
    assert trace["hgp_edges"] == 2 * trace["hypergraph_edges"]


@pytest.mark.parametrize("via", ["chase", "fo", "ndl"])
def test_answer(ex1_files, tmp_path, capsys, via):
    o, q, d = ex1_files
    args = ["answer", "--ontology", o, "--query", q, "--data", d]
    if via == "chase":
        args += ["--via", "chase"]
    else:
        ext = "fo" if via == "fo" else "ndl"
        path = tmp_path / f"r.{ext}"
        mode = "tw-pe" if via == "fo" else "ndl"
        assert main(["rewrite", "--mode", mode, "--arbitrary-data", "--ontology", o, "--query", q, "-o", str(path)]) == 0
        capsys.readouterr()
        args += ["--via", f"{via}:{path}"]
    assert main(args) == EXIT_OK
    assert capsys.readouterr().out.splitlines() == ["a,b"]


def test_stats_prints_hypergraph(ex1_files, capsys):
    o, q, _ = ex1_files
    assert main(["stats", "--ontology", o, "--query", q]) == EXIT_OK
    out = capsys.readouterr().out
    assert json.loads(out[: out.index("}") + 1])["tree_witnesses"] == 2
    h = parse_hypergraph("\n".join(l for l in out.splitlines() if l.startswith(("vertex", "edge"))))
    assert h.size == 2


def test_gadget_clique_facts(capsys):
    assert main(["gadget", "clique", "--n", "4", "--k", "2", "--emit", "facts", "--edges", "12"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "P_1_2(a,a)" in out and "P_2_1(a,a)" in out


def test_gadget_clique_bad_parameters(capsys):
    assert main(["gadget", "clique", "--n", "4", "--k", "5"]) == EXIT_USAGE


def test_translate_hypergraph_to_hgp(tmp_path, capsys):
    src = tmp_path / "h.hg"
    src.write_text("vertex v1\nvertex v2\nedge e1 = v1 v2\nedge e2 = v2\n")
    assert main(["translate", "--from", "hypergraph", "--to", "hgp", "--input", str(src)]) == EXIT_OK
    p = parse_hypergraph(capsys.readouterr().out)
    assert p.size == 4


def test_usage_errors(capsys):
    assert main(["nonsense"]) == EXIT_USAGE
    assert main(["rewrite", "--ontology", "/does/not/exist.tgd", "--query", "x.cq"]) == EXIT_USAGE


def test_global_flags_after_subcommand(capsys):
    assert main(["verify", "--trials", "2", "--seed", "3", "--jobs", "1"]) == EXIT_OK


def test_verify_depth1_small():
    rep = verify_random(TrialConfig(seed=1, trials=20, depth=1))
    assert rep.ok and rep.trials == 20 and rep.checks["tw-pe"] == 20


def test_verify_without_tgds():
    rep = verify_random(TrialConfig(seed=2, trials=10, n_tgds=0, depth=1), ["tw-pe"])
    assert rep.ok and rep.checks["tw-pe"] == 10


def test_verify_corrupted_rewriting_is_caught():
    rep = verify_random(TrialConfig(seed=3, trials=30, depth=1), ["tw-pe"], corrupt=True)
    assert rep.mismatches
    bundle = rep.mismatches[0]
    assert replay(bundle)
    assert replay(json.loads(json.dumps(bundle)))


def test_verify_exit_code_on_mismatch(monkeypatch, capsys):
    real = cli.verify_random
    monkeypatch.setattr(cli, "verify_random", lambda cfg, modes, jobs, **kw: real(cfg, ["tw-pe"], jobs, corrupt=True, **kw))
    assert main(["verify", "--trials", "30", "--seed", "3"]) == EXIT_MISMATCH


def test_verify_is_reproducible():
    cfg = TrialConfig(seed=4, trials=8, depth=2)
    a, b = verify_random(cfg), verify_random(cfg)
    assert a.checks == b.checks and a.nontrivial == b.nontrivial


def test_verify_parallel_matches_serial():
    cfg = TrialConfig(seed=5, trials=8, depth=1)
    a, b = verify_random(cfg, jobs=1), verify_random(cfg, jobs=2)
    assert a.checks == b.checks and a.nontrivial == b.nontrivial


def test_trial_rng_is_per_trial():
    assert trial_rng(1, 2).random() == trial_rng(1, 2).random()
    assert trial_rng(1, 2).random() != trial_rng(1, 3).random()


def test_bench_empty_range():
    assert bench_growth("tree-path", [], "split-pe") == []


def test_bench_tree_path_rows():
    rows = bench_growth("tree-path", [4, 8], "split-pe")
    assert [r["status"] for r in rows] == ["ok", "ok"]
    assert rows[0]["rewriting_size"] == 23


def test_bench_records_caps():
    rows = bench_growth("clique", [4], "tw-pe", max_disjuncts=1000)
    assert rows[0]["status"] == "RewritingTooLarge" and rows[0]["rewriting_size"] is None


def test_bench_csv(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bench", "--family", "tree-path", "--sizes", "4,8", "--csv", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 2 and rows[1]["size"] == "8"


def test_fit_exponent_on_power_law():
    rows = [{"atoms": n, "rewriting_size": 3 * n**2, "status": "ok"} for n in (4, 8, 16, 32)]
    assert fit_exponent(rows) == pytest.approx(2.0)

"""Command-line pipeline: artifact round trips and exit-code contract."""

import subprocess
import sys

import numpy as np
import pytest

from pragrank import load_lexicon, load_ranking
from pragrank.cli import cli_dispatch
from pragrank.scorer import load_ensemble

from .oracles import TOY_SIGMA1_ORDER


def run(*argv):
    return cli_dispatch(list(argv))


class TestPipeline:
    def test_lexicon_rsa_round_trip(self, toy_bundle, tmp_path):
        lex_path = tmp_path / "toy.praglex"
        assert run("lexicon", "--domain", "toy", "--out", str(lex_path)) == 0
        lex = load_lexicon(lex_path)
        assert lex.hypotheses == toy_bundle.lex.hypotheses
        np.testing.assert_array_equal(lex.matrix, toy_bundle.lex.matrix)

        rank_path = tmp_path / "toy.pragrank"
        assert run("rsa", "--lexicon", str(lex_path), "--depth", "1", "--out", str(rank_path)) == 0
        sigma = load_ranking(rank_path)
        assert tuple(sigma.permutation()) == TOY_SIGMA1_ORDER

    def test_enumerate_writes_programs(self, toy_bundle, tmp_path, capsys):
        progs = tmp_path / "programs.txt"
        assert run("enumerate", "--domain", "toy", "--programs-out", str(progs)) == 0
        out = capsys.readouterr().out
        assert "semantic programs: 4" in out
        assert "utterances: 4" in out
        assert progs.read_text().splitlines() == toy_bundle.lex.hypotheses

    def test_dataset_and_anneal(self, toy_bundle, tmp_path, capsys):
        lex_path = tmp_path / "toy.praglex"
        data_path = tmp_path / "toy.pragdata"
        rank_path = tmp_path / "annealed.pragrank"
        run("lexicon", "--domain", "toy", "--out", str(lex_path))
        assert run("dataset", "--domain", "toy", "--N", "3", "--out", str(data_path)) == 0
        assert "12 records" in capsys.readouterr().out
        assert (
            run(
                "distill-anneal",
                "--dataset", str(data_path),
                "--lexicon", str(lex_path),
                "--seed", "0",
                "--out", str(rank_path),
            )
            == 0
        )
        sigma = load_ranking(rank_path)
        assert tuple(sigma.permutation()) == TOY_SIGMA1_ORDER

    def test_replay_and_bench(self, tmp_path, capsys):
        out = tmp_path / "success.csv"
        assert run("replay", "--domain", "toy", "--simulate", "3", "--out", str(out)) == 0
        printed = capsys.readouterr().out
        for name in ("L0", "L1", "L_sigma"):
            assert name in printed
        lines = out.read_text().splitlines()
        assert lines[0] == "listener,turn,success_rate,ci_lo,ci_hi"
        assert len(lines) > 3

        bench_out = tmp_path / "bench.csv"
        assert (
            run(
                "bench",
                "--domain", "toy",
                "--simulate", "2",
                "--listeners", "l0,sigma",
                "--repetitions", "2",
                "--limit", "3",
                "--out", str(bench_out),
            )
            == 0
        )
        lines = bench_out.read_text().splitlines()
        assert lines[0] == "listener,turn,median_ms,ops"
        assert len(lines) == 1 + 2 * 2  # two listeners, two turns

    def test_replay_from_trace_file(self, toy_bundle, tmp_path):
        from pragrank.harness import simulate_traces, write_traces

        traces_path = tmp_path / "traces.tsv"
        write_traces(simulate_traces(toy_bundle.lex, N=2), traces_path)
        out = tmp_path / "success.csv"
        assert (
            run("replay", "--domain", "toy", "--traces", str(traces_path), "--listeners", "l0", "--out", str(out))
            == 0
        )
        assert out.exists()

    def test_distill_neural(self, tmp_path, capsys):
        data_path = tmp_path / "small.pragdata"
        run("dataset", "--domain", "regex-small", "--N", "1", "--out", str(data_path))
        model_path = tmp_path / "model.pragnet"
        rank_path = tmp_path / "neural.pragrank"
        assert (
            run(
                "distill-neural",
                "--domain", "regex-small",
                "--train", str(data_path),
                "--val", str(data_path),
                "--nets", "1",
                "--epochs", "1",
                "--out", str(model_path),
                "--ranking-out", str(rank_path),
            )
            == 0
        )
        assert "trained 1 nets" in capsys.readouterr().out
        assert len(load_ensemble(model_path).nets) == 1
        assert load_ranking(rank_path).n == 336

    def test_theory_commands(self, tmp_path, capsys):
        assert run("theory-exists", "--n", "3", "--depth", "5", "--min-size", "5", "--max-size", "7") == 0
        out = capsys.readouterr().out
        assert "checks: 15" in out and "violations: 0" in out

        stats_path = tmp_path / "stability.csv"
        assert (
            run(
                "theory-stability",
                "--p-trues", "0.5",
                "--sizes", "6",
                "--n-per-cell", "2",
                "--iters", "5",
                "--out", str(stats_path),
            )
            == 0
        )
        lines = stats_path.read_text().splitlines()
        assert lines[0] == "p_true,size,mean,ci_lo,ci_hi"
        assert len(lines) == 2


class TestExitCodes:
    def test_usage_errors_are_1(self, capsys):
        assert run("no-such-command") == 1
        assert run("lexicon", "--domain", "toy") == 1  # missing --out
        assert run("lexicon", "--domain", "galaxies", "--out", "x") == 1
        capsys.readouterr()

    def test_data_errors_are_2(self, tmp_path, capsys):
        assert run("rsa", "--lexicon", str(tmp_path / "missing.praglex"), "--out", str(tmp_path / "o")) == 2
        bad = tmp_path / "bad.praglex"
        bad.write_text("not a lexicon\n")
        assert run("rsa", "--lexicon", str(bad), "--out", str(tmp_path / "o")) == 2
        assert "pragrank: error:" in capsys.readouterr().err

    def test_neural_listener_requires_model(self, tmp_path, capsys):
        out = tmp_path / "success.csv"
        assert run("replay", "--domain", "toy", "--listeners", "neural", "--out", str(out)) == 2
        assert "--model" in capsys.readouterr().err

    def test_unknown_listener_is_2(self, tmp_path, capsys):
        out = tmp_path / "success.csv"
        assert run("replay", "--domain", "toy", "--listeners", "l7", "--out", str(out)) == 2
        capsys.readouterr()


class TestModuleEntryPoint:
    def test_python_dash_m(self):
        proc = subprocess.run(
            [sys.executable, "-m", "pragrank.cli", "enumerate", "--domain", "toy"],
            capture_output=True,
            text=True,
            timeout=120,
        )
        assert proc.returncode == 0
        assert "semantic programs: 4" in proc.stdout

"""Simulated speaker datasets, cycle detection, and the TSV record format."""

import itertools

import numpy as np
import pytest

from pragrank import (
    IncrementalEngine,
    Lexicon,
    ParseError,
    RankingRecord,
    cycle_report,
    generate_dataset,
    load_dataset,
    sample_random_lexicon,
    save_dataset,
)
from pragrank.dataset import dataset_from_text, dataset_to_text

from .oracles import TOY_GREEDY_RANKING_W1, TOY_GREEDY_W1, naive_consistent


def brute_force_cycles(records, n):
    comparable = 0
    conflicted = 0
    for a, b in itertools.combinations(range(n), 2):
        seen = set()
        for rec in records:
            if a in rec.ranking and b in rec.ranking:
                seen.add(rec.ranking.index(a) < rec.ranking.index(b))
        if seen:
            comparable += 1
        if len(seen) == 2:
            conflicted += 1
    return comparable, conflicted


class TestGeneration:
    def test_frozen_greedy_trace(self, toy_lex):
        records = generate_dataset(toy_lex, targets=[1], N=2)
        assert [toy_lex.utterances[u] for u in records[-1].us] == list(TOY_GREEDY_W1)
        for rec in records:
            assert rec.ranking == TOY_GREEDY_RANKING_W1

    def test_record_count_and_prefix_growth(self, toy_lex):
        records = generate_dataset(toy_lex, N=3)
        assert len(records) == toy_lex.n * 3
        for i in range(0, len(records), 3):
            target = records[i].target
            for turn, rec in enumerate(records[i : i + 3], start=1):
                assert rec.target == target
                assert len(rec.us) == turn
            assert records[i].us == records[i + 1].us[:1]

    def test_rankings_cover_consistent_set(self):
        lex = sample_random_lexicon(9, 12, 0.5, rng_seed=4)
        for rec in generate_dataset(lex, N=2):
            assert sorted(rec.ranking) == naive_consistent(lex.matrix, rec.us)
            assert rec.target in rec.ranking

    def test_examples_are_consistent_with_target(self):
        lex = sample_random_lexicon(9, 12, 0.5, rng_seed=5)
        for rec in generate_dataset(lex, N=3):
            for u in rec.us:
                assert lex.matrix[u, rec.target]

    def test_deterministic(self, toy_lex):
        assert generate_dataset(toy_lex, N=2) == generate_dataset(toy_lex, N=2)

    def test_shared_engine_gives_same_records(self, toy_lex):
        engine = IncrementalEngine(toy_lex)
        assert generate_dataset(toy_lex, N=2, engine=engine) == generate_dataset(toy_lex, N=2)

    def test_bad_n_rejected(self, toy_lex):
        with pytest.raises(ValueError):
            generate_dataset(toy_lex, N=0)


class TestCycleReport:
    def test_no_conflicts_in_simulated_data(self, toy_lex):
        records = generate_dataset(toy_lex, N=3)
        report = cycle_report(records, toy_lex.n)
        assert report.conflicted_pairs == 0
        assert report.comparable_pairs > 0
        assert report.fraction == 0.0

    def test_crafted_conflict_detected(self):
        records = [
            RankingRecord(target=0, us=(0,), ranking=(0, 1, 2)),
            RankingRecord(target=1, us=(1,), ranking=(1, 0)),
        ]
        report = cycle_report(records, 3)
        assert report.comparable_pairs == 3  # (0,1), (0,2), (1,2)
        assert report.conflicted_pairs == 1  # (0,1) appears in both orders
        assert report.fraction == pytest.approx(1 / 3)

    def test_matches_brute_force_on_random_records(self):
        rng = np.random.default_rng(12)
        n = 15
        records = []
        for _ in range(40):
            size = int(rng.integers(2, 8))
            ranking = tuple(int(x) for x in rng.choice(n, size=size, replace=False))
            records.append(RankingRecord(target=ranking[0], us=(0,), ranking=ranking))
        comparable, conflicted = brute_force_cycles(records, n)
        report = cycle_report(records, n)
        assert (report.comparable_pairs, report.conflicted_pairs) == (comparable, conflicted)

    def test_singleton_rankings_contribute_nothing(self):
        records = [RankingRecord(target=0, us=(0,), ranking=(0,))]
        report = cycle_report(records, 4)
        assert report.comparable_pairs == 0
        assert report.fraction == 0.0


class TestTextFormat:
    def test_round_trip(self, toy_lex, tmp_path):
        records = generate_dataset(toy_lex, N=2)
        path = tmp_path / "toy.tsv"
        save_dataset(records, toy_lex, path)
        assert load_dataset(path, toy_lex) == records

    def test_text_uses_ids_not_indices(self, toy_lex):
        records = generate_dataset(toy_lex, targets=[1], N=1)
        text = dataset_to_text(records, toy_lex)
        line = text.splitlines()[0]
        target, us, ranking = line.split("\t")
        assert target == "0+1{1}"
        assert us == "01"
        assert ranking.split(",")[0] == "0+1{1}"

    def test_parse_errors(self, toy_lex):
        bad = {
            "fields": "0+1{1}\t01\n",
            "unknown_target": "nope\t01\t0+1{1}\n",
            "unknown_utterance": "0+1{1}\tnope\t0+1{1}\n",
            "unknown_ranked": "0+1{1}\t01\tnope\n",
        }
        for text in bad.values():
            with pytest.raises(ParseError):
                dataset_from_text(text, toy_lex)

    def test_blank_lines_skipped(self, toy_lex):
        records = generate_dataset(toy_lex, targets=[0], N=1)
        text = dataset_to_text(records, toy_lex) + "\n\n"
        assert dataset_from_text(text, toy_lex) == records

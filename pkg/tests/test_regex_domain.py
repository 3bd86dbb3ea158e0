"""Binary regex domain: parsing, matching, enumeration, string sampling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pragrank import CoverageImpossibleError, MalformedProgramError, regex_grammar
from pragrank.domains.regex import (
    LARGE_GRAMMAR,
    SMALL_GRAMMAR,
    GrammarConfig,
    RegexProgram,
    all_strings,
    behavior_matrix,
    build_regex_lexicon,
    enumerate_regexes,
    enumerate_syntactic,
    parse_regex,
    production_sequences,
    regex_match,
    sample_strings,
)

from .oracles import backtrack_match


class TestParse:
    def test_factor_chain(self):
        p = parse_regex("0*1{3}0")
        assert p.factors == (("0", "*"), ("1", "{3}"), ("0", ""))
        assert str(p) == "0*1{3}0"

    def test_round_trip_over_small_grammar(self):
        for p in enumerate_syntactic(SMALL_GRAMMAR):
            assert parse_regex(p.src) == p

    @pytest.mark.parametrize("src", ["", "a", "*0", "0{4}", "0{3", "0x"])
    def test_malformed_sources(self, src):
        with pytest.raises(MalformedProgramError):
            parse_regex(src)


class TestMatch:
    @pytest.mark.parametrize(
        "src,s,expect",
        [
            ("0*", "", True),
            ("0*", "000", True),
            ("0*", "01", False),
            ("0+1*", "0", True),
            ("0+1*", "0011", True),
            ("0+1*", "0110", False),
            ("1{2}", "11", True),
            ("1{2}", "1", False),
            ("1{2}", "111", False),
            ("0?1{3}", "111", True),
            ("0?1{3}", "0111", True),
            ("0?1{3}", "00111", False),
        ],
    )
    def test_hand_cases(self, src, s, expect):
        assert regex_match(src, s) is expect

    def test_alphabet_enforced(self):
        with pytest.raises(ValueError):
            regex_match("0*", "012")

    def test_agrees_with_backtracking_reference(self):
        # exhaustive over the small grammar and every string up to length 5
        strings = all_strings(5)
        for p in enumerate_syntactic(SMALL_GRAMMAR):
            for s in strings:
                assert regex_match(p, s) == backtrack_match(p.factors, s), (p.src, s)

    @given(st.integers(0, 10_000), st.integers(0, 6))
    @settings(max_examples=60, deadline=None)
    def test_large_grammar_spot_checks(self, pick, length):
        progs = enumerate_syntactic(LARGE_GRAMMAR)
        p = progs[pick % len(progs)]
        rng = np.random.default_rng(pick)
        s = "".join(str(int(b)) for b in rng.integers(0, 2, size=length))
        assert regex_match(p, s) == backtrack_match(p.factors, s)

    def test_behavior_matrix_matches_scalar_route(self):
        progs = [parse_regex(src) for src in ("0*", "0+1*", "1{3}", "0?1?0?")]
        strings = ["", "0", "1", "010", "111", "000000"]
        table = behavior_matrix(progs, strings)
        for i, p in enumerate(progs):
            for j, s in enumerate(strings):
                assert table[i, j] == regex_match(p, s)


class TestStringUniverse:
    def test_trie_order(self):
        got = all_strings(3)
        assert got == ["", "0", "1", "00", "01", "10", "11"] + [format(v, "04b")[1:] for v in range(8, 16)]
        assert len(all_strings(12)) == (1 << 13) - 1

    def test_index_round_trip(self):
        from pragrank.domains.regex import _trie_index

        universe = all_strings(6)
        for i, s in enumerate(universe):
            assert _trie_index(s) == i


class TestEnumeration:
    def test_syntactic_counts(self):
        assert len(enumerate_syntactic(SMALL_GRAMMAR)) == 8 + 8**2 + 8**3
        assert len(enumerate_syntactic(LARGE_GRAMMAR)) == 10 + 10**2 + 10**3 + 10**4

    def test_dedupe_rows_distinct(self):
        universe = all_strings(8)
        progs = enumerate_regexes(GrammarConfig(max_factors=2, quantifiers=("", "*", "?")), universe)
        table = np.packbits(behavior_matrix(progs, universe), axis=1)
        assert len({row.tobytes() for row in table}) == len(progs)

    def test_representative_is_shortest_in_class(self):
        config = GrammarConfig(max_factors=2, quantifiers=("", "*", "?"))
        universe = all_strings(8)
        syntactic = enumerate_syntactic(config)
        packed = np.packbits(behavior_matrix(syntactic, universe), axis=1)
        shortest: dict[bytes, int] = {}
        for p, row in zip(syntactic, packed):
            key = row.tobytes()
            shortest[key] = min(shortest.get(key, 99), len(p.src))
        reps = enumerate_regexes(config, universe)
        rep_rows = np.packbits(behavior_matrix(reps, universe), axis=1)
        for p, row in zip(reps, rep_rows):
            assert len(p.src) == shortest[row.tobytes()]

    def test_class_counts_at_both_scales(self, regex_small_bundle, regex_large_bundle):
        assert regex_small_bundle.lex.n == 336
        assert regex_large_bundle.lex.n == 3564

    def test_small_classes_contained_in_large(self, regex_small_bundle, regex_large_bundle):
        universe = all_strings(12)
        small = [parse_regex(h) for h in regex_small_bundle.lex.hypotheses]
        large = [parse_regex(h) for h in regex_large_bundle.lex.hypotheses]
        small_keys = {row.tobytes() for row in np.packbits(behavior_matrix(small, universe), axis=1)}
        large_keys = {row.tobytes() for row in np.packbits(behavior_matrix(large, universe), axis=1)}
        assert small_keys <= large_keys


@pytest.fixture(scope="module")
def small_programs():
    return enumerate_syntactic(SMALL_GRAMMAR)


class TestSampleStrings:
    def test_floor_and_order(self, small_programs):
        sample = sample_strings(small_programs, count=400, L_max=10)
        floor = all_strings(3)
        assert sample[: len(floor)] == floor
        from pragrank.domains.regex import _trie_index

        indices = [_trie_index(s) for s in sample]
        assert indices == sorted(indices)
        # the fill pool is capped at strings matching >= 1 program
        assert len(floor) < len(sample) <= 400

    def test_fill_consumes_entire_pool(self, small_programs):
        # at this scale fewer strings match some program than were asked for,
        # so the sample is exactly the matched pool plus the coverage floor
        universe = all_strings(12)
        pool = {s for s, hit in zip(universe, behavior_matrix(small_programs, universe).any(axis=0)) if hit}
        sample = sample_strings(small_programs, count=2000, L_max=12)
        assert set(sample) == pool | set(all_strings(3))

    def test_every_program_has_a_witness(self, small_programs):
        sample = sample_strings(small_programs, count=400, L_max=10)
        table = behavior_matrix(small_programs, sample)
        assert table.any(axis=1).all()

    def test_sample_separates_all_classes(self, small_programs):
        universe = all_strings(10)
        full_classes = {row.tobytes() for row in np.packbits(behavior_matrix(small_programs, universe), axis=1)}
        sample = sample_strings(small_programs, count=400, L_max=10)
        sampled = {row.tobytes() for row in np.packbits(behavior_matrix(small_programs, sample), axis=1)}
        assert len(sampled) == len(full_classes)

    def test_deterministic(self, small_programs):
        a = sample_strings(small_programs, count=350, L_max=10, rng_seed=3)
        b = sample_strings(small_programs, count=350, L_max=10, rng_seed=3)
        assert a == b

    def test_count_cap(self):
        with pytest.raises(ValueError):
            sample_strings([parse_regex("0*")], count=10, L_max=2)

    def test_uncoverable_program(self):
        with pytest.raises(CoverageImpossibleError):
            sample_strings([parse_regex("0{3}")], count=3, L_max=1)


class TestLexiconAndEncodings:
    def test_lexicon_layout(self):
        progs = [parse_regex(src) for src in ("0", "1", "0*1")]
        strings = ["0", "1", "01", "001"]
        lex = build_regex_lexicon(progs, strings)
        assert lex.utterances == strings
        assert lex.hypotheses == ["0", "1", "0*1"]
        for i, s in enumerate(strings):
            for j, p in enumerate(progs):
                assert lex.matrix[i, j] == regex_match(p, s)

    def test_production_sequences(self):
        config = SMALL_GRAMMAR
        seqs = production_sequences([parse_regex("0*1{3}0"), parse_regex("1")], config)
        # layout: arity-1, then (atom, quantifier index) per slot, zero padded
        assert seqs[0] == (2, 0, 1, 1, 3, 0, 0)
        assert seqs[1] == (0, 1, 0, 0, 0, 0, 0)
        grammar = regex_grammar(config.max_factors, len(config.quantifiers))
        encoded = grammar.encode_many(seqs)
        assert encoded.shape == (2, grammar.dim)

    def test_production_sequences_reject_foreign_programs(self):
        with pytest.raises(MalformedProgramError):
            production_sequences([parse_regex("0+")], SMALL_GRAMMAR)  # "+" not in small set
        too_long = RegexProgram(src="0000", factors=(("0", ""),) * 4)
        with pytest.raises(MalformedProgramError):
            production_sequences([too_long], SMALL_GRAMMAR)

    def test_bundle_encodings_align(self, regex_small_bundle):
        b = regex_small_bundle
        assert b.encodings.shape == (b.lex.n, b.grammar.dim)
        assert len({row.tobytes() for row in b.encodings}) == b.lex.n

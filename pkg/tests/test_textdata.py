import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mthd.errors import MthdError, RuleParseError, VocabIndexError
from mthd.rng import SplitMix64
from mthd.textdata import (
    BOS_ID,
    EOS_ID,
    UNK_ID,
    Vocabulary,
    build_vocab,
    default_rules,
    default_word_list,
    detokenize,
    gen_modern_lines,
    gen_synthetic_corpus,
    load_parallel,
    parse_rules,
    tokenize,
    write_lines,
)
from mthd.textdata.rules import antiquate_line


class TestBuildVocab:
    def test_empty_corpus(self):
        v = build_vocab([], "word")
        assert len(v) == 4
        assert v.content_tokens() == []

    def test_word_mode_hand_count(self):
        v = build_vocab(["ab ab c"], "word", min_freq=1)
        assert len(v) == 6
        # frequency desc then lexicographic
        assert v.content_tokens() == ["ab", "c"]

    def test_char_single_symbol(self):
        v = build_vocab(["aa"], "char")
        assert len(v) == 5
        assert v.content_tokens() == ["a"]

    def test_min_freq_filters(self):
        v = build_vocab(["a a b"], "word", min_freq=2)
        assert v.content_tokens() == ["a"]

    def test_deterministic_order(self):
        v = build_vocab(["b a", "a b", "c"], "word")
        assert v.content_tokens() == ["a", "b", "c"]


class TestTokenize:
    def test_empty_string(self):
        v = build_vocab(["ab"], "char")
        assert tokenize("", v) == [BOS_ID, EOS_ID]

    def test_char_mode_by_definition(self):
        v = build_vocab(["ab"], "char")
        ids = tokenize("ab", v)
        assert ids == [BOS_ID, v.encode_token("a"), v.encode_token("b"), EOS_ID]

    def test_unknown_word_maps_to_unk(self):
        v = build_vocab(["the cat"], "word")
        assert tokenize("xyzzy", v) == [BOS_ID, UNK_ID, EOS_ID]

    def test_detokenize_word_join(self):
        v = build_vocab(["the cat"], "word")
        assert detokenize(tokenize("the cat", v), v) == "the cat"

    def test_detokenize_empty(self):
        v = build_vocab([], "word")
        assert detokenize([BOS_ID, EOS_ID], v) == ""

    def test_out_of_range_id(self):
        v = build_vocab([], "word")
        with pytest.raises(VocabIndexError):
            detokenize([BOS_ID, 99, EOS_ID], v)

    @settings(max_examples=150, deadline=None)
    @given(st.text(alphabet="abc xyz", max_size=30))
    def test_roundtrip_char_mode(self, s):
        v = build_vocab([s], "char")
        assert detokenize(tokenize(s, v), v) == s

    @settings(max_examples=150, deadline=None)
    @given(st.lists(st.sampled_from(["la", "casa", "vieja", "de"]), max_size=8))
    def test_roundtrip_word_mode(self, words):
        s = " ".join(words)
        v = build_vocab([s] if s else ["x"], "word")
        assert detokenize(tokenize(s, v), v) == s

    def test_bijection_on_known_tokens(self):
        v = build_vocab(["the cat sat"], "word")
        for tok in v.content_tokens():
            assert v.token_of(v.encode_token(tok)) == tok


class TestCorpusIO:
    def test_order_and_count_preserved(self, tmp_path):
        write_lines(tmp_path / "s.txt", ["a", "b", "c"])
        write_lines(tmp_path / "t.txt", ["x", "y", "z"])
        c = load_parallel(tmp_path / "s.txt", tmp_path / "t.txt")
        assert c.pairs == [("a", "x"), ("b", "y"), ("c", "z")]

    def test_unequal_counts_rejected(self, tmp_path):
        write_lines(tmp_path / "s.txt", ["a", "b"])
        write_lines(tmp_path / "t.txt", ["x"])
        with pytest.raises(MthdError, match="differ"):
            load_parallel(tmp_path / "s.txt", tmp_path / "t.txt")

    def test_blank_pairs_dropped(self, tmp_path):
        write_lines(tmp_path / "s.txt", ["a", "", "c"])
        write_lines(tmp_path / "t.txt", ["x", "y", "z"])
        c = load_parallel(tmp_path / "s.txt", tmp_path / "t.txt")
        assert c.pairs == [("a", "x"), ("c", "z")]


class TestRules:
    def test_parse_basic(self):
        rules = parse_rules("^u\tv\t1.0\nb\tv\t0.5\n# comment\n")
        assert len(rules) == 2
        assert rules[0].anchor_start and not rules[0].anchor_end
        assert rules[1].probability == 0.5

    def test_bad_probability_has_line_number(self):
        with pytest.raises(RuleParseError, match="line 2"):
            parse_rules("a\tb\t1.0\nc\td\tnope\n")

    def test_probability_out_of_range(self):
        with pytest.raises(RuleParseError):
            parse_rules("a\tb\t1.5\n")

    def test_mid_pattern_anchor_rejected(self):
        with pytest.raises(RuleParseError):
            parse_rules("a^b\tc\t1.0\n")

    def test_missing_fields(self):
        with pytest.raises(RuleParseError, match="line 1"):
            parse_rules("ab\t1.0\n")

    def test_forced_word_initial_rule(self):
        rules = parse_rules("^u\tv\t1.0\n")
        rng = SplitMix64(0)
        assert antiquate_line("uno", rules, rng) == "vno"
        assert antiquate_line("tuno", rules, SplitMix64(0)) == "tuno"

    def test_anchor_end(self):
        rules = parse_rules("y$\ti\t1.0\n")
        assert antiquate_line("muy ya", rules, SplitMix64(0)) == "mui ya"

    def test_left_to_right_non_overlapping(self):
        rules = parse_rules("aa\tb\t1.0\n")
        assert antiquate_line("aaa", rules, SplitMix64(0)) == "ba"


class TestSyntheticCorpus:
    def test_empty_rules_identity(self):
        lines = ["uno dos", "tres"]
        c = gen_synthetic_corpus(lines, [], seed=1)
        assert all(s == t for s, t in c.pairs)

    def test_single_forced_rule(self):
        rules = parse_rules("^u\tv\t1.0\n")
        c = gen_synthetic_corpus(["uno"], rules, seed=9)
        assert c.pairs == [("vno", "uno")]

    def test_target_side_never_altered(self):
        lines = gen_modern_lines(50, seed=3)
        c = gen_synthetic_corpus(lines, default_rules(), seed=4)
        assert c.targets() == lines

    def test_deterministic_across_runs(self):
        lines = gen_modern_lines(100, seed=30)
        rules = default_rules()
        a = gen_synthetic_corpus(lines, rules, seed=5)
        b = gen_synthetic_corpus(lines, rules, seed=5)
        assert a.pairs == b.pairs

    def test_different_seed_differs(self):
        lines = gen_modern_lines(100, seed=30)
        rules = default_rules()
        a = gen_synthetic_corpus(lines, rules, seed=5)
        b = gen_synthetic_corpus(lines, rules, seed=6)
        assert a.pairs != b.pairs


def _all_outcomes(word, rules):
    """Enumerate every antiquated form over all probabilistic choices."""
    from itertools import product

    results = {word}
    for rule in rules:
        nxt = set()
        for w in results:
            spans = []
            pos = 0
            plen = len(rule.pattern)
            while pos < len(w):
                if rule.matches_at(w, pos):
                    spans.append((pos, True))
                    pos += plen
                else:
                    spans.append((pos, False))
                    pos += 1
            n = sum(1 for _, m in spans if m)
            if rule.probability >= 1.0:
                combos = [(True,) * n]
            elif rule.probability <= 0.0:
                combos = [(False,) * n]
            else:
                combos = list(product([True, False], repeat=n))
            for combo in combos:
                out, k = [], 0
                for pos, matched in spans:
                    if matched:
                        out.append(rule.replacement if combo[k] else w[pos : pos + plen])
                        k += 1
                    else:
                        out.append(w[pos])
                nxt.add("".join(out))
        results = nxt
    return results


def test_default_rules_are_injective_on_word_stock():
    """No two modern words may share an antiquated form: this keeps the
    old->modern direction a learnable function."""
    rules = default_rules()
    seen = {}
    for w in default_word_list():
        for form in _all_outcomes(w, rules):
            assert seen.get(form, w) == w, f"collision on {form!r}: {seen[form]} vs {w}"
            seen[form] = w


def test_default_rules_count_in_spec_range():
    assert 8 <= len(default_rules()) <= 12

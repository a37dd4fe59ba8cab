import pytest

from ditto.errors import VocabError
from ditto.tokenization import (
    TokenizedSentence,
    Vocab,
    basic_tokenize,
    encode,
    from_ids,
    mask_positions,
    non_special_positions,
    parse_pretokenized_line,
    wordpiece,
)


@pytest.fixture
def vocab():
    return Vocab(
        ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
         "the", "cat", "sat", "hello", "un", "##aff", "##able", "##s", ",", "."]
    )


@pytest.fixture(scope="module")
def parity_vocab(fixtures_dir):
    return Vocab.load(fixtures_dir / "parity" / "vocab.txt")


class TestVocab:
    def test_missing_special_raises(self):
        with pytest.raises(VocabError, match=r"\[MASK\]"):
            Vocab(["[PAD]", "[UNK]", "[CLS]", "[SEP]", "word"])

    def test_duplicate_raises(self):
        with pytest.raises(VocabError, match="duplicate"):
            Vocab(["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "a", "a"])

    def test_bijection(self, vocab):
        for i, tok in enumerate(vocab.id_to_token):
            assert vocab.token_to_id[tok] == i

    def test_load_save_round_trip(self, vocab, tmp_path):
        path = tmp_path / "vocab.txt"
        vocab.save(path)
        reloaded = Vocab.load(path)
        assert reloaded.id_to_token == vocab.id_to_token


class TestBasicTokenize:
    def test_lowercase_and_punct_split(self):
        assert basic_tokenize("The cat, sat.") == ["the", "cat", ",", "sat", "."]

    def test_accent_stripping(self):
        assert basic_tokenize("Café MÉTRO") == ["cafe", "metro"]

    def test_control_chars_removed(self):
        assert basic_tokenize("he\x00llo") == ["hello"]

    def test_cjk_split_per_char(self):
        assert basic_tokenize("北京 ok") == ["北", "京", "ok"]


class TestWordpiece:
    def test_verbatim_word(self, vocab):
        assert wordpiece("hello", vocab) == [vocab.token_to_id["hello"]]

    def test_greedy_longest_match(self, vocab):
        ids = wordpiece("unaffable", vocab)
        assert [vocab.id_to_token[i] for i in ids] == ["un", "##aff", "##able"]

    def test_continuation_piece(self, vocab):
        ids = wordpiece("cats", vocab)
        assert [vocab.id_to_token[i] for i in ids] == ["cat", "##s"]

    def test_unknown_chars(self, vocab):
        assert wordpiece("xyzzy", vocab) == [vocab.unk_id]

    def test_overlong_word(self, vocab):
        assert wordpiece("a" * 101, vocab) == [vocab.unk_id]

    def test_empty_word_rejected(self, vocab):
        with pytest.raises(ValueError):
            wordpiece("", vocab)


class TestEncode:
    def test_single_word(self, vocab):
        s = encode("hello", vocab)
        assert list(s.ids) == [vocab.cls_id, vocab.token_to_id["hello"], vocab.sep_id]
        assert len(s.word_spans) == 1
        assert s.word_spans[0].word == "hello"

    def test_framing(self, vocab):
        s = encode("the cat sat", vocab)
        assert s.ids[0] == vocab.cls_id
        assert s.ids[-1] == vocab.sep_id

    def test_truncation_exact_length(self, vocab):
        s = encode("the cat sat " * 50, vocab, max_len=10)
        assert s.n_tokens == 10
        assert s.ids[-1] == vocab.sep_id

    def test_truncation_clips_partial_word(self, vocab):
        # "unaffable" has 3 pieces; max_len 4 leaves room for only one.
        s = encode("unaffable", vocab, max_len=4)
        assert s.n_tokens == 4
        assert s.word_spans[0].end - s.word_spans[0].start == 2

    def test_degenerate_empty(self, vocab):
        s = encode("   ", vocab)
        assert list(s.ids) == [vocab.cls_id, vocab.sep_id]
        assert s.word_spans == ()

    def test_max_len_floor(self, vocab):
        with pytest.raises(ValueError):
            encode("hello", vocab, max_len=2)

    def test_spans_disjoint_ordered_cover(self, vocab):
        s = encode("the cats sat, unaffable hello.", vocab)
        covered = []
        for span in s.word_spans:
            assert span.start < span.end
            covered.extend(range(span.start, span.end))
        assert covered == list(range(1, s.n_tokens - 1))

    def test_round_trip_reconstructs_words(self, vocab):
        text = "The cats sat, unaffable hello."
        s = encode(text, vocab)
        words = basic_tokenize(text)
        for span, word in zip(s.word_spans, words):
            pieces = [vocab.id_to_token[i] for i in s.ids[span.start : span.end]]
            rebuilt = pieces[0] + "".join(p.removeprefix("##") for p in pieces[1:])
            if vocab.unk_id not in s.ids[span.start : span.end]:
                assert rebuilt == word

    def test_deterministic(self, vocab):
        assert encode("the cat sat", vocab) == encode("the cat sat", vocab)


class TestMaskPositions:
    def test_empty_identity(self, vocab):
        s = encode("the cat sat", vocab)
        assert mask_positions(s, set(), vocab) == s

    def test_single_position(self, vocab):
        s = encode("the cat sat", vocab)
        masked = mask_positions(s, {2}, vocab)
        diffs = [i for i, (a, b) in enumerate(zip(s.ids, masked.ids)) if a != b]
        assert diffs == [2]
        assert masked.ids[2] == vocab.mask_id

    def test_two_positions(self, vocab):
        s = encode("the cat sat", vocab)
        masked = mask_positions(s, {1, 3}, vocab)
        diffs = [i for i, (a, b) in enumerate(zip(s.ids, masked.ids)) if a != b]
        assert diffs == [1, 3]

    def test_preserves_structure(self, vocab):
        s = encode("the cats sat", vocab)
        masked = mask_positions(s, {2}, vocab)
        assert masked.n_tokens == s.n_tokens
        assert masked.word_spans == s.word_spans

    def test_cls_rejected(self, vocab):
        s = encode("the cat", vocab)
        with pytest.raises(IndexError):
            mask_positions(s, {0}, vocab)

    def test_sep_rejected(self, vocab):
        s = encode("the cat", vocab)
        with pytest.raises(IndexError):
            mask_positions(s, {s.n_tokens - 1}, vocab)

    def test_out_of_range(self, vocab):
        s = encode("the cat", vocab)
        with pytest.raises(IndexError):
            mask_positions(s, {99}, vocab)

    def test_unk_is_maskable(self, vocab):
        s = encode("xyzzy", vocab)
        masked = mask_positions(s, {1}, vocab)
        assert masked.ids[1] == vocab.mask_id


class TestPretokenized:
    def test_parse_line(self, vocab):
        s = parse_pretokenized_line("2 5 6 3", vocab)
        assert list(s.ids) == [2, 5, 6, 3]
        assert [sp.word for sp in s.word_spans] == ["the", "cat"]

    def test_bad_line(self):
        with pytest.raises(ValueError):
            parse_pretokenized_line("2 five 3")

    def test_from_ids_without_vocab(self):
        s = from_ids([0, 10, 11, 2])
        assert len(s.word_spans) == 2

    def test_non_special_positions_counts_unk(self, vocab):
        s = encode("the xyzzy cat", vocab)
        assert non_special_positions(s, vocab) == [1, 2, 3]


class TestReferenceParity:
    """Byte-exact agreement with the committed reference tokenizer output."""

    def test_figure_sentence(self, parity_vocab, parity_corpus):
        entry = parity_corpus[0]
        assert "social media transitions" in entry["text"]
        s = encode(entry["text"], parity_vocab, max_len=128)
        assert list(s.ids) == entry["ids"]

    def test_ten_adversarial_sentences(self, parity_vocab, parity_corpus):
        for entry in parity_corpus[:40]:
            s = encode(entry["text"], parity_vocab, max_len=128)
            assert list(s.ids) == entry["ids"], f"mismatch on {entry['text']!r}"


def test_tokenized_sentence_is_immutable(vocab):
    s = encode("the cat", vocab)
    assert isinstance(s, TokenizedSentence)
    with pytest.raises(AttributeError):
        s.ids = (1, 2)

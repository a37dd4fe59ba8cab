"""Uncased BERT-compatible text pipeline.

Basic tokenization (control-char removal, CJK splitting, lowercasing with
accent stripping, punctuation splitting) followed by greedy longest-match
WordPiece, with [CLS]/[SEP] assembly and word<->subword alignment. The
pipeline is byte-compatible with the reference uncased tokenizer; parity is
pinned by a committed 200-sentence fixture corpus.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field, replace

from .errors import VocabError

PAD_TOKEN = "[PAD]"
UNK_TOKEN = "[UNK]"
CLS_TOKEN = "[CLS]"
SEP_TOKEN = "[SEP]"
MASK_TOKEN = "[MASK]"

_SPECIAL_TOKENS = (PAD_TOKEN, UNK_TOKEN, CLS_TOKEN, SEP_TOKEN, MASK_TOKEN)

MAX_CHARS_PER_WORD = 100
DEFAULT_MAX_LEN = 128


def _is_whitespace(char: str) -> bool:
    # \t, \n, \r are control characters but are treated as whitespace here.
    if char in (" ", "\t", "\n", "\r"):
        return True
    return unicodedata.category(char) == "Zs"


def _is_control(char: str) -> bool:
    if char in ("\t", "\n", "\r"):
        return False
    return unicodedata.category(char).startswith("C")


def _is_punctuation(char: str) -> bool:
    cp = ord(char)
    # Non-letter/number ASCII counts as punctuation even where Unicode
    # disagrees ("^", "$", "`"), matching the reference pipeline.
    if 33 <= cp <= 47 or 58 <= cp <= 64 or 91 <= cp <= 96 or 123 <= cp <= 126:
        return True
    return unicodedata.category(char).startswith("P")


def _is_cjk(cp: int) -> bool:
    return (
        0x4E00 <= cp <= 0x9FFF
        or 0x3400 <= cp <= 0x4DBF
        or 0x20000 <= cp <= 0x2A6DF
        or 0x2A700 <= cp <= 0x2B73F
        or 0x2B740 <= cp <= 0x2B81F
        or 0x2B820 <= cp <= 0x2CEAF
        or 0xF900 <= cp <= 0xFAFF
        or 0x2F800 <= cp <= 0x2FA1F
    )


def _clean_text(text: str) -> str:
    out = []
    for char in text:
        cp = ord(char)
        if cp == 0 or cp == 0xFFFD or _is_control(char):
            continue
        out.append(" " if _is_whitespace(char) else char)
    return "".join(out)


def _split_cjk(text: str) -> str:
    out = []
    for char in text:
        if _is_cjk(ord(char)):
            out.append(f" {char} ")
        else:
            out.append(char)
    return "".join(out)


def _strip_accents(text: str) -> str:
    return "".join(
        c for c in unicodedata.normalize("NFD", text) if unicodedata.category(c) != "Mn"
    )


def _split_on_punct(token: str) -> list[str]:
    pieces: list[list[str]] = []
    start_new = True
    for char in token:
        if _is_punctuation(char):
            pieces.append([char])
            start_new = True
        else:
            if start_new:
                pieces.append([])
            start_new = False
            pieces[-1].append(char)
    return ["".join(p) for p in pieces]


def basic_tokenize(text: str, lowercase: bool = True) -> list[str]:
    """The pre-WordPiece stage: clean, CJK-split, lowercase+deaccent, punct-split.

    Output tokens are the alignment unit for word_spans and the TF-IDF
    vocabulary.
    """
    text = _split_cjk(_clean_text(text))
    words: list[str] = []
    for token in text.split():
        if lowercase:
            token = _strip_accents(token.lower())
        words.extend(_split_on_punct(token))
    return [w for w in words if w]


class Vocab:
    """Immutable token<->id bijection with the five BERT special tokens."""

    def __init__(self, tokens: list[str]):
        self.id_to_token = list(tokens)
        self.token_to_id = {tok: i for i, tok in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            seen: set[str] = set()
            dupes = [t for t in self.id_to_token if t in seen or seen.add(t)]
            raise VocabError(f"duplicate vocab entries: {sorted(set(dupes))[:5]}")
        missing = [t for t in _SPECIAL_TOKENS if t not in self.token_to_id]
        if missing:
            raise VocabError(f"vocab is missing special tokens: {missing}")
        self.pad_id = self.token_to_id[PAD_TOKEN]
        self.unk_id = self.token_to_id[UNK_TOKEN]
        self.cls_id = self.token_to_id[CLS_TOKEN]
        self.sep_id = self.token_to_id[SEP_TOKEN]
        self.mask_id = self.token_to_id[MASK_TOKEN]
        self.special_ids = frozenset(
            (self.pad_id, self.unk_id, self.cls_id, self.sep_id, self.mask_id)
        )
        # [UNK] stands in for a real word and stays maskable/poolable; the
        # other four are sentence structure and never content.
        self.structural_ids = frozenset((self.pad_id, self.cls_id, self.sep_id, self.mask_id))

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    @classmethod
    def load(cls, path) -> "Vocab":
        """Read a vocab.txt: one token per line, id = zero-based line number."""
        with open(path, encoding="utf-8") as f:
            tokens = [line.rstrip("\n") for line in f]
        while tokens and tokens[-1] == "":
            tokens.pop()
        if not tokens:
            raise VocabError(f"empty vocab file: {path}")
        return cls(tokens)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for tok in self.id_to_token:
                f.write(tok + "\n")


@dataclass(frozen=True)
class WordSpan:
    """One basic-stage word and its contiguous subword range in `ids` (end exclusive)."""

    word: str
    start: int
    end: int


@dataclass(frozen=True)
class TokenizedSentence:
    """[CLS] + subword ids + [SEP] with word alignment metadata."""

    text: str
    ids: tuple[int, ...]
    word_spans: tuple[WordSpan, ...] = field(default=())

    @property
    def n_tokens(self) -> int:
        return len(self.ids)

    def words(self) -> list[str]:
        return [s.word for s in self.word_spans]


def wordpiece(word: str, vocab: Vocab, max_chars: int = MAX_CHARS_PER_WORD) -> list[int]:
    """Greedy longest-match-first segmentation of one cleaned word into subword ids.

    Continuation pieces are looked up with the "##" prefix. Unsegmentable or
    over-long words map to [unk_id].
    """
    if not word:
        raise ValueError("wordpiece: empty word")
    if len(word) > max_chars:
        return [vocab.unk_id]
    ids: list[int] = []
    start = 0
    while start < len(word):
        end = len(word)
        cur = None
        while start < end:
            piece = word[start:end]
            if start > 0:
                piece = "##" + piece
            if piece in vocab:
                cur = vocab.token_to_id[piece]
                break
            end -= 1
        if cur is None:
            return [vocab.unk_id]
        ids.append(cur)
        start = end
    return ids


def _split_out_specials(text: str) -> list[tuple[bool, str]]:
    """Split raw text around literal special-token strings.

    Matches are exact and case-sensitive, anywhere in the text (even inside
    words), and happen before any normalization, mirroring the reference
    tokenizer's added-token scan. Returns (is_special, segment) parts.
    """
    parts: list[tuple[bool, str]] = []
    rest = text
    while rest:
        hit = None
        for tok in _SPECIAL_TOKENS:
            pos = rest.find(tok)
            if pos >= 0 and (hit is None or pos < hit[0]):
                hit = (pos, tok)
        if hit is None:
            parts.append((False, rest))
            break
        pos, tok = hit
        if pos:
            parts.append((False, rest[:pos]))
        parts.append((True, tok))
        rest = rest[pos + len(tok) :]
    return parts


def encode(text: str, vocab: Vocab, max_len: int = DEFAULT_MAX_LEN) -> TokenizedSentence:
    """Tokenize to [CLS] + subwords + [SEP], truncating subwords to fit max_len.

    Literal special-token strings in the text map to their ids (and carry no
    word span). Empty / whitespace-only text yields the degenerate
    [CLS][SEP] sentence with zero word_spans.
    """
    if max_len < 3:
        raise ValueError(f"encode: max_len must be >= 3, got {max_len}")
    budget = max_len - 2
    ids = [vocab.cls_id]
    spans: list[WordSpan] = []

    def room() -> int:
        return budget - (len(ids) - 1)

    truncated = False
    for is_special, segment in _split_out_specials(text):
        if truncated:
            break
        if is_special:
            if room() <= 0:
                truncated = True
                break
            ids.append(vocab.token_to_id[segment])
            continue
        for word in basic_tokenize(segment):
            piece_ids = wordpiece(word, vocab)
            if room() <= 0:
                truncated = True
                break
            if len(piece_ids) > room():
                piece_ids = piece_ids[: room()]
                truncated = True
            spans.append(WordSpan(word, len(ids), len(ids) + len(piece_ids)))
            ids.extend(piece_ids)
            if truncated:
                break
    ids.append(vocab.sep_id)
    return TokenizedSentence(text=text, ids=tuple(ids), word_spans=tuple(spans))


def from_ids(ids, vocab: Vocab | None = None, text: str = "") -> TokenizedSentence:
    """Wrap a pre-tokenized id sequence (specials included) as a TokenizedSentence.

    Used for models whose tokenizer is not WordPiece; each non-special id
    becomes its own single-token span so pooling stays well-defined.
    """
    ids = tuple(int(i) for i in ids)
    if len(ids) < 2:
        raise ValueError(f"from_ids: need at least [CLS]/[SEP]-like framing, got {len(ids)} ids")
    structural = vocab.structural_ids if vocab is not None else frozenset((ids[0], ids[-1]))
    spans = []
    for pos, tok in enumerate(ids):
        if pos in (0, len(ids) - 1) or tok in structural:
            continue
        word = vocab.id_to_token[tok] if vocab is not None and tok < len(vocab) else str(tok)
        spans.append(WordSpan(word.removeprefix("##"), pos, pos + 1))
    return TokenizedSentence(text=text, ids=ids, word_spans=tuple(spans))


def mask_positions(s: TokenizedSentence, positions, vocab: Vocab) -> TokenizedSentence:
    """Copy `s` with the ids at `positions` replaced by [MASK].

    Positions must address non-special tokens: index 0 ([CLS]) and the final
    [SEP] are off limits.
    """
    ids = list(s.ids)
    for pos in positions:
        if not 0 <= pos < len(ids):
            raise IndexError(f"mask position {pos} out of range for {len(ids)} tokens")
        if pos == 0 or pos == len(ids) - 1 or ids[pos] in vocab.structural_ids:
            raise IndexError(f"mask position {pos} targets a special token")
    for pos in positions:
        ids[pos] = vocab.mask_id
    return replace(s, ids=tuple(ids))


def non_special_positions(s: TokenizedSentence, vocab: Vocab) -> list[int]:
    """Token indices of real (content) tokens, in order. [UNK] counts as content."""
    return [
        i
        for i, tok in enumerate(s.ids)
        if i not in (0, len(s.ids) - 1) and tok not in vocab.structural_ids
    ]


def parse_pretokenized_line(line: str, vocab: Vocab | None = None) -> TokenizedSentence:
    """One sentence as space-separated integer ids including specials."""
    try:
        ids = [int(part) for part in line.split()]
    except ValueError as exc:
        raise ValueError(f"pre-tokenized line is not whitespace-separated ints: {line!r}") from exc
    return from_ids(ids, vocab=vocab)

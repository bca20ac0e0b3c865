"""Verse-aligned parallel corpora: loading, tokenization and side vocabularies."""

from __future__ import annotations

import logging
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)

_LANG_RE = re.compile(r"^[a-z]{2,3}([-_][A-Za-z0-9]+)?$")


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class LangDomainTag:
    language: str
    domain: str

    def __post_init__(self):
        if not _LANG_RE.match(self.language):
            raise ValueError(f"invalid language code {self.language!r}")
        if not self.domain:
            raise ValueError("domain must be non-empty")

    def __str__(self):
        return f"{self.language}/{self.domain}"

    @classmethod
    def parse(cls, text: str) -> "LangDomainTag":
        """Parse ``lang/domain`` (e.g. ``fra/bible``)."""
        lang, sep, domain = text.partition("/")
        if not sep:
            raise ValueError(f"expected LANG/DOMAIN, got {text!r}")
        return cls(lang, domain)


@dataclass(frozen=True)
class TokenizationPolicy:
    lowercase: bool = True
    strip_punctuation: bool = True
    min_token_length: int = 1

    def __post_init__(self):
        if self.min_token_length < 1:
            raise ValueError("min_token_length must be >= 1")


DEFAULT_POLICY = TokenizationPolicy()


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip_punct(token: str) -> str:
    start, end = 0, len(token)
    while start < end and _is_punct(token[start]):
        start += 1
    while end > start and _is_punct(token[end - 1]):
        end -= 1
    return token[start:end]


def tokenize(text: str, policy: TokenizationPolicy = DEFAULT_POLICY) -> list[str]:
    """Whitespace tokenization with optional lowercasing and edge-punctuation stripping.

    Only leading and trailing punctuation is removed, so internal
    apostrophes and hyphens survive (``don't`` stays ``don't``).
    """
    tokens = []
    for tok in text.split():
        if policy.lowercase:
            tok = tok.lower()
        if policy.strip_punctuation:
            tok = _strip_punct(tok)
        if len(tok) >= policy.min_token_length:
            tokens.append(tok)
    return tokens


@dataclass(frozen=True)
class VersePair:
    verse_id: str
    source_tokens: tuple[str, ...]
    target_tokens: tuple[str, ...]


@dataclass(frozen=True)
class ParallelCorpus:
    source_tag: LangDomainTag
    target_tag: LangDomainTag
    pairs: tuple[VersePair, ...]
    policy: TokenizationPolicy = DEFAULT_POLICY
    dropped: int = 0

    def __post_init__(self):
        if not self.pairs:
            raise CorpusError("corpus has no verse pairs")
        seen = set()
        for p in self.pairs:
            if p.verse_id in seen:
                raise CorpusError(f"duplicate verse_id {p.verse_id!r}")
            seen.add(p.verse_id)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]

    @classmethod
    def from_token_lists(cls, pairs, source_tag=None, target_tag=None, policy=DEFAULT_POLICY):
        """Build a corpus from ``(source_tokens, target_tokens)`` sequences.

        Strings are split on whitespace. Verse ids are the pair indices.
        """
        source_tag = source_tag or LangDomainTag("eng", "bible")
        target_tag = target_tag or LangDomainTag("xxx", "bible")
        built = []
        for i, (src, tgt) in enumerate(pairs):
            if isinstance(src, str):
                src = src.split()
            if isinstance(tgt, str):
                tgt = tgt.split()
            built.append(VersePair(str(i), tuple(src), tuple(tgt)))
        return cls(source_tag, target_tag, tuple(built), policy)


@dataclass(frozen=True)
class Vocabulary:
    tag: LangDomainTag
    entries: dict[str, int] = field(default_factory=dict)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, word):
        return word in self.entries

    def __getitem__(self, word):
        return self.entries[word]

    @property
    def total(self) -> int:
        return sum(self.entries.values())

    def most_common(self, n=None):
        # ties broken lexicographically so output is stable
        items = sorted(self.entries.items(), key=lambda kv: (-kv[1], kv[0]))
        return items if n is None else items[:n]


def load_parallel_corpus(
    path,
    source_tag: LangDomainTag,
    target_tag: LangDomainTag,
    policy: TokenizationPolicy = DEFAULT_POLICY,
) -> ParallelCorpus:
    """Read a ``verse_id<TAB>source<TAB>target`` file.

    Blank lines are skipped. Pairs where either side tokenizes to nothing
    are dropped; the count is kept in ``ParallelCorpus.dropped``.
    """
    path = Path(path)
    pairs = []
    seen = {}
    dropped = 0
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise CorpusError(f"{path}:{lineno}: expected 3 tab-separated columns, got {len(cols)}")
            verse_id, src, tgt = cols
            if verse_id in seen:
                raise CorpusError(
                    f"{path}:{lineno}: duplicate verse_id {verse_id!r} (first seen on line {seen[verse_id]})"
                )
            seen[verse_id] = lineno
            src_toks = tokenize(src, policy)
            tgt_toks = tokenize(tgt, policy)
            if not src_toks or not tgt_toks:
                dropped += 1
                continue
            pairs.append(VersePair(verse_id, tuple(src_toks), tuple(tgt_toks)))
    if not seen:
        raise CorpusError(f"{path}: empty corpus file")
    if not pairs:
        raise CorpusError(f"{path}: every verse pair tokenized to an empty side")
    if dropped:
        logger.warning("%s: dropped %d verse pairs with an empty side", path, dropped)
    return ParallelCorpus(source_tag, target_tag, tuple(pairs), policy, dropped)


def build_vocab(corpus: ParallelCorpus, side: str) -> Vocabulary:
    if side == "source":
        counts = Counter(tok for p in corpus.pairs for tok in p.source_tokens)
        tag = corpus.source_tag
    elif side == "target":
        counts = Counter(tok for p in corpus.pairs for tok in p.target_tokens)
        tag = corpus.target_tag
    else:
        raise ValueError(f"side must be 'source' or 'target', got {side!r}")
    return Vocabulary(tag, dict(counts))

"""Polarity lexica and their TSV format (``word<TAB>POS|NEG[<TAB>weight]``)."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import LangDomainTag


class LexiconError(ValueError):
    pass


class Polarity(enum.Enum):
    POSITIVE = "POS"
    NEGATIVE = "NEG"

    @classmethod
    def parse(cls, text: str) -> "Polarity":
        key = text.strip().upper()
        if key in ("POS", "POSITIVE", "+", "1"):
            return cls.POSITIVE
        if key in ("NEG", "NEGATIVE", "-", "-1", "0"):
            return cls.NEGATIVE
        raise LexiconError(f"unknown polarity {text!r}")

    @property
    def other(self) -> "Polarity":
        return Polarity.NEGATIVE if self is Polarity.POSITIVE else Polarity.POSITIVE


POS = Polarity.POSITIVE
NEG = Polarity.NEGATIVE


@dataclass(frozen=True)
class LexiconEntry:
    polarity: Polarity
    weight: float = 1.0


@dataclass
class SeedLexicon:
    tag: LangDomainTag | None
    entries: dict[str, LexiconEntry] = field(default_factory=dict)

    def __post_init__(self):
        for word, entry in self.entries.items():
            if not (math.isfinite(entry.weight) and entry.weight > 0):
                raise LexiconError(f"weight for {word!r} must be finite and > 0")

    @classmethod
    def from_labels(cls, labels: dict[str, Polarity], tag=None) -> "SeedLexicon":
        return cls(tag, {w: LexiconEntry(p) for w, p in labels.items()})

    def __len__(self):
        return len(self.entries)

    def __contains__(self, word):
        return word in self.entries

    def __iter__(self):
        return iter(sorted(self.entries))

    def polarity(self, word: str) -> Polarity:
        return self.entries[word].polarity

    def labels(self) -> dict[str, Polarity]:
        return {w: e.polarity for w, e in self.entries.items()}

    def words(self) -> set[str]:
        return set(self.entries)

    def counts(self) -> dict[Polarity, int]:
        out = {POS: 0, NEG: 0}
        for e in self.entries.values():
            out[e.polarity] += 1
        return out

    def save(self, path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
            for word in sorted(self.entries):
                e = self.entries[word]
                fh.write(f"{word}\t{e.polarity.value}\t{e.weight!r}\n")

    @classmethod
    def load(cls, path, tag=None, lowercase: bool = False) -> "SeedLexicon":
        """Read a lexicon TSV. A missing weight column means weight 1.0.

        Repeated words keep their first entry.
        """
        entries: dict[str, LexiconEntry] = {}
        with Path(path).open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n").rstrip("\r")
                if not line.strip() or line.startswith("#"):
                    continue
                cols = line.split("\t")
                if len(cols) not in (2, 3):
                    raise LexiconError(f"{path}:{lineno}: expected 2 or 3 tab-separated columns")
                word = cols[0].lower() if lowercase else cols[0]
                try:
                    pol = Polarity.parse(cols[1])
                    weight = float(cols[2]) if len(cols) == 3 else 1.0
                except (LexiconError, ValueError) as exc:
                    raise LexiconError(f"{path}:{lineno}: {exc}") from exc
                if not (math.isfinite(weight) and weight > 0):
                    raise LexiconError(f"{path}:{lineno}: weight must be finite and > 0")
                entries.setdefault(word, LexiconEntry(pol, weight))
        return cls(tag, entries)

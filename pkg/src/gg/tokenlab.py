"""Vocabulary-extension experiments and fertility-rate reporting.

The tokenizer is a greedy longest-match segmenter over an explicit
vocabulary: tokens never span whitespace, whitespace runs are emitted as
their own tokens, and unmatched characters fall back to single-character
tokens. Concatenating the tokens always reproduces the input exactly.
"""

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .asmtext import count_words
from .errors import IsaEmpty, VocabLoadError

_WS_SPLIT = re.compile(r"(\s+)")


@dataclass
class Vocab:
    entries: list[str]
    name: str = ""
    _set: set[str] = field(init=False, repr=False)
    _max_len: int = field(init=False, repr=False)

    def __post_init__(self):
        deduped: list[str] = []
        seen: set[str] = set()
        for entry in self.entries:
            if entry and entry not in seen:
                seen.add(entry)
                deduped.append(entry)
        self.entries = deduped
        self._set = seen
        self._max_len = max((len(e) for e in deduped), default=1)

    def __contains__(self, token: str) -> bool:
        return token in self._set

    def __len__(self) -> int:
        return len(self.entries)


def load_vocab(path: str | Path, name: str | None = None) -> Vocab:
    """Load a newline-delimited vocabulary file.

    Lines are taken verbatim apart from the trailing newline, so a line
    holding a single space is a valid one-character entry. Duplicates are
    dropped, order preserved.
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise VocabLoadError(f"cannot read vocab {path}: {exc}") from exc
    entries = [line for line in raw.split("\n") if line]
    vocab = Vocab(entries=entries, name=name or path.stem)
    if not vocab.entries:
        raise VocabLoadError(f"vocab {path} contains no entries")
    return vocab


def extend_vocab(base: Vocab, isa_terms: list[str], name: str | None = None) -> Vocab:
    """Append new terms to a base vocabulary, preserving base order."""
    return Vocab(entries=list(base.entries) + list(isa_terms),
                 name=name or (base.name + "+ext" if base.name else "ext"))


def tokenize(vocab: Vocab, text: str) -> list[str]:
    """Greedy longest-match segmentation with single-character fallback."""
    tokens: list[str] = []
    for piece in _WS_SPLIT.split(text):
        if not piece:
            continue
        if piece.isspace():
            tokens.append(piece)
            continue
        i = 0
        n = len(piece)
        while i < n:
            match = piece[i]
            for length in range(min(vocab._max_len, n - i), 1, -1):
                candidate = piece[i:i + length]
                if candidate in vocab:
                    match = candidate
                    break
            tokens.append(match)
            i += len(match)
    return tokens


@dataclass
class FertilityReport:
    isas: list[str]
    base_name: str
    extended_name: str
    # per (vocab name, isa): total tokens / total words
    fertility: dict[tuple[str, str], float]
    tokens: dict[tuple[str, str], int]
    words: dict[str, int]
    artifact_counts: dict[str, int]

    def delta_pct(self, isa: str) -> float:
        """Percent reduction of the extended vocab vs the base, signed."""
        base = self.fertility[(self.base_name, isa)]
        extended = self.fertility[(self.extended_name, isa)]
        return (base - extended) / base * 100.0


def fertility_report(texts_by_isa: dict[str, list[str]], base: Vocab,
                     extended: Vocab) -> FertilityReport:
    """Corpus-level fertility (tokens/words) per vocabulary and ISA."""
    base_name = base.name or "base"
    extended_name = extended.name or "extended"
    fertility: dict[tuple[str, str], float] = {}
    tokens: dict[tuple[str, str], int] = {}
    words: dict[str, int] = {}
    artifact_counts: dict[str, int] = {}
    for isa, texts in texts_by_isa.items():
        total_words = sum(count_words(t) for t in texts)
        if total_words == 0:
            raise IsaEmpty(f"no words in any artifact for {isa}")
        words[isa] = total_words
        artifact_counts[isa] = len(texts)
        for vocab, vocab_name in ((base, base_name), (extended, extended_name)):
            total_tokens = sum(len(tokenize(vocab, t)) for t in texts)
            tokens[(vocab_name, isa)] = total_tokens
            fertility[(vocab_name, isa)] = total_tokens / total_words
    return FertilityReport(
        isas=list(texts_by_isa),
        base_name=base_name,
        extended_name=extended_name,
        fertility=fertility,
        tokens=tokens,
        words=words,
        artifact_counts=artifact_counts,
    )


def load_isa_terms(isa: str) -> list[str]:
    """Shipped opcode/register term list for one ISA.

    Each file documents its own derivation in header comments; comment
    lines start with '#'.
    """
    try:
        text = (resources.files("gg") / "isa_terms" / f"{isa}.txt").read_text("utf-8")
    except (FileNotFoundError, OSError) as exc:
        raise VocabLoadError(f"no term list for isa {isa}") from exc
    return [line for line in text.splitlines()
            if line and not line.startswith("#")]

"""Sentence segmentation, character cleaning, conjoined-word repair, and
sentence-length outlier filtering.

All operations are pure functions over immutable inputs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .corpus import SentenceRecord
from .errors import EmptyInput

# Abbreviations whose trailing period must not end a sentence. Stored
# without the final dot, lowercase.
DEFAULT_ABBREVIATIONS = frozenset(
    {"dr", "mr", "ms", "mrs", "prof", "e.g", "i.e", "vs", "st", "fig", "jr", "sr", "al"}
)

_TERMINAL_RE = re.compile(r"[.!?]+")
_WORD_BEFORE_RE = re.compile(r"(\S+)$")
_BLANK_LINE_RE = re.compile(r"\n[ \t\r]*\n")


@dataclass(frozen=True)
class CleaningConfig:
    keep_whitespace: bool = True
    collapse_whitespace_runs: bool = True
    preserve_case: bool = True


@dataclass(frozen=True)
class SplitterConfig:
    """Dictionary-driven conjoined-word splitter settings.

    ``cost_model`` maps a word to its frequency rank (1-based line number
    in the dictionary file); lower rank means cheaper, so segmentations
    built from common words win.
    """

    dictionary: frozenset[str]
    min_token_length: int = 6
    cost_model: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.min_token_length < 1:
            raise ValueError("min_token_length must be >= 1")
        if not self.dictionary:
            raise ValueError("splitter dictionary must be non-empty")

    def cost(self, word: str) -> int:
        # words missing from the rank table sort after every ranked word
        return self.cost_model.get(word, len(self.cost_model) + 1)


@dataclass(frozen=True)
class IqrBounds:
    q1: float
    q3: float

    def __post_init__(self):
        if self.q1 > self.q3:
            raise ValueError(f"q1 {self.q1} > q3 {self.q3}")


def load_splitter_config(path: str | Path | None = None, min_token_length: int = 6) -> SplitterConfig:
    """Load the splitter dictionary (one lowercase word per line, rank =
    line number); defaults to the packaged word list."""
    if path is None:
        text = resources.files("lori.data").joinpath("wordlist.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    words = [w.strip() for w in text.splitlines() if w.strip() and not w.startswith("#")]
    ranks = {}
    for i, w in enumerate(words, start=1):
        ranks.setdefault(w, i)
    return SplitterConfig(
        dictionary=frozenset(ranks),
        min_token_length=min_token_length,
        cost_model=ranks,
    )


# --- segmentation --------------------------------------------------------


def _is_abbreviation(text: str, terminal_start: int, abbreviations: frozenset[str]) -> bool:
    before = _WORD_BEFORE_RE.search(text[:terminal_start])
    if not before:
        return False
    word = before.group(1).rstrip(".").lower()
    if len(word) == 1 and word.isalpha():
        return True  # single-letter initials: "A. Manager"
    return word in abbreviations


def segment_sentences(
    raw_text: str,
    letter_id: str = "doc",
    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS,
) -> list[SentenceRecord]:
    """Split text into sentences with exact character spans.

    A sentence ends at a run of ``.!?`` followed by whitespace or end of
    text, unless the preceding word is a guarded abbreviation. A blank
    line (two or more newlines) also forces a boundary, which keeps
    salutations and letter headers out of the first sentence. Spans
    reconstruct their text exactly via ``raw_text[start:end]``.
    """
    records: list[SentenceRecord] = []
    n = len(raw_text)
    pos = 0
    index = 0

    def emit(start: int, end: int) -> None:
        nonlocal index
        # trim surrounding whitespace off the span
        while start < end and raw_text[start].isspace():
            start += 1
        while end > start and raw_text[end - 1].isspace():
            end -= 1
        if end <= start:
            return
        text = raw_text[start:end]
        records.append(
            SentenceRecord(
                sentence_id=f"{letter_id}:s{index}",
                letter_id=letter_id,
                text=text,
                start=start,
                end=end,
                char_length=end - start,
                token_count=max(1, len(text.split())),
            )
        )
        index += 1

    start = 0
    while pos < n:
        match = _TERMINAL_RE.search(raw_text, pos)
        blank = _BLANK_LINE_RE.search(raw_text, pos)
        if blank is not None and (match is None or blank.start() < match.start()):
            emit(start, blank.start())
            pos = start = blank.end()
            continue
        if match is None:
            break
        end = match.end()
        at_boundary = end >= n or raw_text[end].isspace()
        only_period = match.group() == "."
        if at_boundary and not (only_period and _is_abbreviation(raw_text, match.start(), abbreviations)):
            emit(start, end)
            start = end
        pos = end
    emit(start, n)
    return records


# --- cleaning ------------------------------------------------------------


def clean_text(text: str, config: CleaningConfig = CleaningConfig()) -> str:
    """Strip everything but alphanumeric characters.

    Runs of removed characters become a single space (or one space per
    character when ``collapse_whitespace_runs`` is off); leading and
    trailing separators are dropped entirely. Idempotent.
    """
    out: list[str] = []
    pending_sep = 0
    for ch in text:
        if ch.isalnum():
            if pending_sep and out and config.keep_whitespace:
                out.append(" " if config.collapse_whitespace_runs else " " * pending_sep)
            pending_sep = 0
            out.append(ch if config.preserve_case else ch.lower())
        else:
            pending_sep += 1
    return "".join(out)


# --- conjoined-word repair -------------------------------------------------


def split_conjoined(token: str, config: SplitterConfig) -> list[str]:
    """Undo words that lost their separating space.

    Tokens at or below the length threshold, or already in the
    dictionary, pass through unchanged. Otherwise the minimum-cost full
    segmentation into dictionary words is returned (cost = sum of word
    ranks, ties broken by fewer words, then lexicographically); if no
    full segmentation exists the token passes through unchanged.
    """
    if not token:
        raise ValueError("token must be non-empty")
    if len(token) <= config.min_token_length:
        return [token]
    lower = token.lower()
    if lower in config.dictionary:
        return [token]

    n = len(lower)
    # best[i]: (cost, word_count, words) for lower[:i], or None
    best: list[tuple[int, int, tuple[str, ...]] | None] = [None] * (n + 1)
    best[0] = (0, 0, ())
    for i in range(1, n + 1):
        candidate: tuple[int, int, tuple[str, ...]] | None = None
        for j in range(0, i):
            prev = best[j]
            if prev is None:
                continue
            word = lower[j:i]
            if word not in config.dictionary:
                continue
            state = (prev[0] + config.cost(word), prev[1] + 1, prev[2] + (word,))
            if candidate is None or state < candidate:
                candidate = state
        best[i] = candidate

    if best[n] is None:
        return [token]
    # slice the original token at the chosen boundaries to preserve case
    words = best[n][2]
    pieces: list[str] = []
    cursor = 0
    for word in words:
        pieces.append(token[cursor:cursor + len(word)])
        cursor += len(word)
    return pieces


def repair_text(text: str, config: SplitterConfig) -> str:
    """Apply :func:`split_conjoined` to every whitespace-separated token."""
    repaired: list[str] = []
    for token in text.split():
        repaired.extend(split_conjoined(token, config))
    return " ".join(repaired)


# --- outlier filtering -----------------------------------------------------


def _quantile(sorted_values: list[int], p: float) -> float:
    """Linear-interpolation quantile: index = (n - 1) * p on the sorted sample."""
    n = len(sorted_values)
    idx = (n - 1) * p
    lo = int(idx)
    frac = idx - lo
    if lo + 1 < n:
        return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo])
    return float(sorted_values[lo])


def iqr_filter(sentences: list[SentenceRecord]) -> tuple[list[SentenceRecord], IqrBounds]:
    """Keep sentences whose character length lies within [Q1, Q3].

    Bounds are inclusive; relative order is preserved. Filtering on the
    middle of the length distribution drops fragments and run-ons before
    they pollute downstream training data.
    """
    if not sentences:
        raise EmptyInput("iqr_filter requires at least one sentence")
    lengths = sorted(s.char_length for s in sentences)
    bounds = IqrBounds(q1=_quantile(lengths, 0.25), q3=_quantile(lengths, 0.75))
    kept = [s for s in sentences if bounds.q1 <= s.char_length <= bounds.q3]
    return kept, bounds

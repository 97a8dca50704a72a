"""Domain types, on-disk formats, and split management for letters,
sentences, and labels.

On disk a corpus is a directory of newline-delimited JSON record files
(`letters.ndrec`, `sentences.ndrec`, `labels.ndrec`) plus a `manifest`
carrying the schema version. Offsets are 0-based character offsets into
the letter's ``raw_text``.

Corpus objects are immutable once built; construction goes through
:class:`CorpusBuilder`, which is single-owner until sealed.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from ._util import read_ndjson, stable_json, write_ndjson
from .errors import (
    BadFractions,
    DanglingReference,
    EmptyCorpus,
    MissingFile,
    SchemaViolation,
)

SCHEMA_VERSION = 1

MANIFEST_FILE = "manifest"
LETTERS_FILE = "letters.ndrec"
SENTENCES_FILE = "sentences.ndrec"
LABELS_FILE = "labels.ndrec"


class WriterRole(str, enum.Enum):
    MANAGER = "manager"
    INSTRUCTOR = "instructor"
    COLLEAGUE = "colleague"
    UNKNOWN = "unknown"


class LabelSource(str, enum.Enum):
    HUMAN = "human"
    WEAK = "weak"
    MODEL = "model"


class MicroLabel(str, enum.Enum):
    """The three leadership subcomponents tracked throughout the system."""

    TEAMWORK = "teamwork"
    COMMUNICATION = "communication"
    INNOVATION = "innovation"

    @classmethod
    def ordered(cls) -> tuple["MicroLabel", ...]:
        return (cls.TEAMWORK, cls.COMMUNICATION, cls.INNOVATION)


@dataclass(frozen=True)
class SentenceRecord:
    sentence_id: str
    letter_id: str
    text: str
    start: int
    end: int
    char_length: int
    token_count: int

    def __post_init__(self):
        if self.end <= self.start:
            raise ValueError(f"sentence {self.sentence_id}: end {self.end} <= start {self.start}")
        if self.char_length != self.end - self.start or self.char_length != len(self.text):
            raise ValueError(
                f"sentence {self.sentence_id}: char_length {self.char_length} "
                f"inconsistent with span/text"
            )
        if self.text and self.token_count < 1:
            raise ValueError(f"sentence {self.sentence_id}: token_count must be >= 1")

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True)
class LetterDocument:
    letter_id: str
    applicant_id: str
    writer_role: WriterRole
    raw_text: str
    sentence_ids: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.applicant_id:
            raise ValueError(f"letter {self.letter_id}: applicant_id must be non-empty")


@dataclass(frozen=True)
class LabelRecord:
    sentence_id: str
    label: int
    source: LabelSource
    annotator_id: str | None = None
    confidence: float = 1.0

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label for {self.sentence_id} must be 0 or 1")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence for {self.sentence_id} out of [0, 1]")
        if self.source == LabelSource.HUMAN and self.confidence != 1.0:
            raise ValueError(f"human label for {self.sentence_id} must carry confidence 1.0")


@dataclass(frozen=True)
class DatasetSplit:
    name: str  # train | validation | test
    sentence_ids: frozenset[str]


@dataclass(frozen=True, eq=False)
class Corpus:
    letters: Mapping[str, LetterDocument]
    sentences: Mapping[str, SentenceRecord]
    labels: tuple[LabelRecord, ...]

    def __eq__(self, other):
        if not isinstance(other, Corpus):
            return NotImplemented
        return (
            dict(self.letters) == dict(other.letters)
            and dict(self.sentences) == dict(other.sentences)
            and self.labels == other.labels
        )

    def __len__(self) -> int:
        return len(self.sentences)

    def applicant_of(self, sentence_id: str) -> str:
        return self.letters[self.sentences[sentence_id].letter_id].applicant_id

    def applicant_ids(self) -> set[str]:
        return {letter.applicant_id for letter in self.letters.values()}

    def sentences_of_letter(self, letter_id: str) -> list[SentenceRecord]:
        return [self.sentences[sid] for sid in self.letters[letter_id].sentence_ids]


class CorpusBuilder:
    """Accumulates records, then validates everything at seal time."""

    def __init__(self):
        self._letters: dict[str, LetterDocument] = {}
        self._sentences: dict[str, SentenceRecord] = {}
        self._labels: list[LabelRecord] = []
        self._label_keys: set[tuple[str, str, str | None]] = set()
        self._sealed = False

    def _check_open(self):
        if self._sealed:
            raise RuntimeError("builder already sealed")

    def add_letter(self, letter: LetterDocument) -> None:
        self._check_open()
        if letter.letter_id in self._letters:
            raise ValueError(f"duplicate letter_id {letter.letter_id}")
        self._letters[letter.letter_id] = letter

    def add_sentence(self, sentence: SentenceRecord) -> None:
        self._check_open()
        if sentence.sentence_id in self._sentences:
            raise ValueError(f"duplicate sentence_id {sentence.sentence_id}")
        self._sentences[sentence.sentence_id] = sentence

    def add_label(self, label: LabelRecord) -> None:
        """Duplicate (sentence, source, annotator) triples are rejected;
        the same sentence labeled by different annotators is kept (that
        disagreement is what agreement metrics consume)."""
        self._check_open()
        key = (label.sentence_id, label.source.value, label.annotator_id)
        if key in self._label_keys:
            raise ValueError(
                f"duplicate label for sentence {label.sentence_id} from "
                f"({label.source.value}, {label.annotator_id})"
            )
        self._label_keys.add(key)
        self._labels.append(label)

    def seal(self) -> Corpus:
        self._check_open()
        self._sealed = True

        for sentence in self._sentences.values():
            letter = self._letters.get(sentence.letter_id)
            if letter is None:
                raise DanglingReference(
                    f"sentence {sentence.sentence_id} references unknown letter "
                    f"{sentence.letter_id}"
                )
            if sentence.end > len(letter.raw_text):
                raise ValueError(
                    f"sentence {sentence.sentence_id} span {sentence.span} exceeds "
                    f"letter text of length {len(letter.raw_text)}"
                )
            if letter.raw_text[sentence.start:sentence.end] != sentence.text:
                raise ValueError(
                    f"sentence {sentence.sentence_id} text does not match its span"
                )

        # letters must list their sentences ordered and non-overlapping
        fixed_letters: dict[str, LetterDocument] = {}
        by_letter: dict[str, list[SentenceRecord]] = {}
        for sentence in self._sentences.values():
            by_letter.setdefault(sentence.letter_id, []).append(sentence)
        for letter_id, letter in self._letters.items():
            present = sorted(by_letter.get(letter_id, []), key=lambda s: s.start)
            prev_end = -1
            for s in present:
                if s.start < prev_end:
                    raise ValueError(
                        f"letter {letter_id}: overlapping sentence spans at {s.span}"
                    )
                prev_end = s.end
            ordered_ids = tuple(s.sentence_id for s in present)
            if letter.sentence_ids and letter.sentence_ids != ordered_ids:
                # stored listing must agree with the span ordering
                if set(letter.sentence_ids) != set(ordered_ids):
                    raise DanglingReference(
                        f"letter {letter_id} lists sentence ids that do not match "
                        f"its sentences"
                    )
            fixed_letters[letter_id] = LetterDocument(
                letter_id=letter.letter_id,
                applicant_id=letter.applicant_id,
                writer_role=letter.writer_role,
                raw_text=letter.raw_text,
                sentence_ids=ordered_ids,
            )

        for label in self._labels:
            if label.sentence_id not in self._sentences:
                raise DanglingReference(
                    f"label references unknown sentence {label.sentence_id}"
                )

        return Corpus(
            letters=MappingProxyType(fixed_letters),
            sentences=MappingProxyType(dict(self._sentences)),
            labels=tuple(self._labels),
        )


# --- persistence --------------------------------------------------------


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    write_ndjson(
        root / LETTERS_FILE,
        (
            {
                "letter_id": l.letter_id,
                "applicant_id": l.applicant_id,
                "writer_role": l.writer_role.value,
                "raw_text": l.raw_text,
                "sentence_ids": list(l.sentence_ids),
            }
            for l in corpus.letters.values()
        ),
    )
    write_ndjson(
        root / SENTENCES_FILE,
        (
            {
                "sentence_id": s.sentence_id,
                "letter_id": s.letter_id,
                "text": s.text,
                "start": s.start,
                "end": s.end,
                "char_length": s.char_length,
                "token_count": s.token_count,
            }
            for s in corpus.sentences.values()
        ),
    )
    write_ndjson(
        root / LABELS_FILE,
        (
            {
                "sentence_id": lb.sentence_id,
                "label": lb.label,
                "source": lb.source.value,
                "annotator_id": lb.annotator_id,
                "confidence": lb.confidence,
            }
            for lb in corpus.labels
        ),
    )
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "letters": len(corpus.letters),
        "sentences": len(corpus.sentences),
        "labels": len(corpus.labels),
    }
    (root / MANIFEST_FILE).write_text(stable_json(manifest) + "\n", encoding="utf-8")


def _field(rec: dict, name: str, kind, file: str, line: int, optional: bool = False):
    if name not in rec or rec[name] is None:
        if optional:
            return None
        raise SchemaViolation(file, line, name, "missing required field")
    value = rec[name]
    if kind is int and isinstance(value, bool):
        raise SchemaViolation(file, line, name, "expected integer, got boolean")
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind):
        raise SchemaViolation(file, line, name, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def load_corpus(path: str | Path) -> Corpus:
    """Load and validate a corpus directory.

    An empty directory loads as an empty corpus; a directory with a
    manifest must contain all three record files.
    """
    root = Path(path)
    if not root.is_dir():
        raise MissingFile(f"corpus directory not found: {root}")

    manifest_path = root / MANIFEST_FILE
    record_files = [root / LETTERS_FILE, root / SENTENCES_FILE, root / LABELS_FILE]
    if not manifest_path.exists():
        if any(p.exists() for p in record_files):
            raise MissingFile(f"record files present but manifest missing in {root}")
        return CorpusBuilder().seal()

    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaViolation(MANIFEST_FILE, 1, "-", f"manifest is not valid JSON: {exc}")
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise SchemaViolation(
            MANIFEST_FILE, 1, "schema_version",
            f"unsupported schema version {manifest.get('schema_version')!r}",
        )
    for p in record_files:
        if not p.exists():
            raise MissingFile(f"missing record file: {p}")

    builder = CorpusBuilder()

    for lineno, rec in read_ndjson(root / LETTERS_FILE):
        role_raw = _field(rec, "writer_role", str, LETTERS_FILE, lineno)
        try:
            role = WriterRole(role_raw)
        except ValueError:
            raise SchemaViolation(LETTERS_FILE, lineno, "writer_role", f"unknown role {role_raw!r}")
        sentence_ids = rec.get("sentence_ids", [])
        if not isinstance(sentence_ids, list):
            raise SchemaViolation(LETTERS_FILE, lineno, "sentence_ids", "expected list")
        try:
            builder.add_letter(
                LetterDocument(
                    letter_id=_field(rec, "letter_id", str, LETTERS_FILE, lineno),
                    applicant_id=_field(rec, "applicant_id", str, LETTERS_FILE, lineno),
                    writer_role=role,
                    raw_text=_field(rec, "raw_text", str, LETTERS_FILE, lineno),
                    sentence_ids=tuple(sentence_ids),
                )
            )
        except ValueError as exc:
            raise SchemaViolation(LETTERS_FILE, lineno, "-", str(exc))

    for lineno, rec in read_ndjson(root / SENTENCES_FILE):
        try:
            builder.add_sentence(
                SentenceRecord(
                    sentence_id=_field(rec, "sentence_id", str, SENTENCES_FILE, lineno),
                    letter_id=_field(rec, "letter_id", str, SENTENCES_FILE, lineno),
                    text=_field(rec, "text", str, SENTENCES_FILE, lineno),
                    start=_field(rec, "start", int, SENTENCES_FILE, lineno),
                    end=_field(rec, "end", int, SENTENCES_FILE, lineno),
                    char_length=_field(rec, "char_length", int, SENTENCES_FILE, lineno),
                    token_count=_field(rec, "token_count", int, SENTENCES_FILE, lineno),
                )
            )
        except ValueError as exc:
            raise SchemaViolation(SENTENCES_FILE, lineno, "-", str(exc))

    for lineno, rec in read_ndjson(root / LABELS_FILE):
        source_raw = _field(rec, "source", str, LABELS_FILE, lineno)
        try:
            source = LabelSource(source_raw)
        except ValueError:
            raise SchemaViolation(LABELS_FILE, lineno, "source", f"unknown source {source_raw!r}")
        try:
            builder.add_label(
                LabelRecord(
                    sentence_id=_field(rec, "sentence_id", str, LABELS_FILE, lineno),
                    label=_field(rec, "label", int, LABELS_FILE, lineno),
                    source=source,
                    annotator_id=rec.get("annotator_id"),
                    confidence=_field(rec, "confidence", float, LABELS_FILE, lineno),
                )
            )
        except ValueError as exc:
            raise SchemaViolation(LABELS_FILE, lineno, "-", str(exc))

    try:
        return builder.seal()
    except ValueError as exc:
        raise SchemaViolation("corpus", 0, "-", str(exc))


# --- splits and balance --------------------------------------------------

SPLIT_NAMES = ("train", "validation", "test")


def split_by_applicant(
    corpus: Corpus,
    fractions: Mapping[str, float],
    seed: int,
) -> dict[str, DatasetSplit]:
    """Applicant-disjoint train/validation/test splits.

    Fractions apply to applicant counts (sentences follow their
    applicant), so no applicant ever straddles two splits. Deterministic
    for a fixed seed.
    """
    if len(corpus.sentences) == 0:
        raise EmptyCorpus("cannot split an empty corpus")
    unknown = set(fractions) - set(SPLIT_NAMES)
    if unknown:
        raise BadFractions(f"unknown split names: {sorted(unknown)}")
    values = [float(fractions.get(name, 0.0)) for name in SPLIT_NAMES]
    if any(v < 0 for v in values):
        raise BadFractions("fractions must be non-negative")
    if abs(sum(values) - 1.0) > 1e-9:
        raise BadFractions(f"fractions sum to {sum(values)!r}, expected 1.0")

    applicants = sorted(corpus.applicant_ids())
    rng = random.Random(seed)
    rng.shuffle(applicants)

    n = len(applicants)
    # largest-remainder allocation keeps the counts summing to n exactly
    raw = [v * n for v in values]
    counts = [int(r) for r in raw]
    remainders = sorted(range(3), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in remainders[: n - sum(counts)]:
        counts[i] += 1

    by_applicant: dict[str, list[str]] = {a: [] for a in applicants}
    for sid, sentence in corpus.sentences.items():
        by_applicant[corpus.letters[sentence.letter_id].applicant_id].append(sid)

    splits: dict[str, DatasetSplit] = {}
    offset = 0
    for name, count in zip(SPLIT_NAMES, counts):
        chunk = applicants[offset:offset + count]
        offset += count
        ids: set[str] = set()
        for applicant in chunk:
            ids.update(by_applicant[applicant])
        splits[name] = DatasetSplit(name=name, sentence_ids=frozenset(ids))
    return splits


def class_balance(
    corpus: Corpus,
    source: LabelSource | None = None,
) -> dict[int, tuple[int, float]]:
    """Label counts and fractions over labels matching the source filter."""
    matching = [lb for lb in corpus.labels if source is None or lb.source == source]
    if not matching:
        return {}
    total = len(matching)
    out: dict[int, tuple[int, float]] = {}
    for value in (0, 1):
        count = sum(1 for lb in matching if lb.label == value)
        if count:
            out[value] = (count, count / total)
    return out

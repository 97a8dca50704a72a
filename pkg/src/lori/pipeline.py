"""Document ingestion, per-letter analysis, and applicant-report assembly.

A submitted document (typically one PDF holding three letters) flows
through a pluggable text extractor, is partitioned into letters by an
explicit boundary rule, segmented into sentences, classified sentence by
sentence, and the positive sentences feed phrase extraction and the
cross-letter summary. Identifiers are derived from the document's
content hash, so re-ingesting identical bytes reproduces identical ids.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Protocol, Sequence

from ._util import format_fraction, stable_json
from .classify import ClassifierHandle
from .corpus import (
    Corpus,
    CorpusBuilder,
    LetterDocument,
    MicroLabel,
    SentenceRecord,
    WriterRole,
)
from .errors import (
    BoundaryMismatch,
    EmptyDocument,
    EmptyLetter,
    ExtractionFailure,
    StageError,
)
from .extract import ExtractionResult, SummaryResult, micro_label_distribution
from .textprep import segment_sentences


class TextExtractor(Protocol):
    kind: str  # text_layer | ocr | fixture

    def extract(self, data: bytes) -> list[str]: ...


class FixtureExtractor:
    """Plain-text documents with form-feed page breaks; the deterministic
    extractor every test runs on."""

    kind = "fixture"

    def extract(self, data: bytes) -> list[str]:
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ExtractionFailure(f"fixture document is not UTF-8: {exc}")
        return text.split("\f")


class TextLayerExtractor:
    """Pulls the embedded text layer out of a PDF, page by page."""

    kind = "text_layer"

    def extract(self, data: bytes) -> list[str]:
        try:
            import io

            from pypdf import PdfReader
        except ImportError as exc:
            raise ExtractionFailure(f"text_layer extraction needs pypdf: {exc}")
        try:
            reader = PdfReader(io.BytesIO(data))
            return [page.extract_text() or "" for page in reader.pages]
        except Exception as exc:
            raise ExtractionFailure(f"could not read PDF: {exc}")


class OcrExtractor:
    """Renders pages to images and recognizes them with an injected OCR
    engine; the rendering detail stays inside this adapter."""

    kind = "ocr"

    def __init__(self, engine: Callable[[bytes], list[str]] | None = None):
        self._engine = engine

    def extract(self, data: bytes) -> list[str]:
        if self._engine is None:
            raise ExtractionFailure("no OCR engine configured")
        return self._engine(data)


@dataclass(frozen=True)
class BoundarySpec:
    """How extracted pages are partitioned into letters."""

    kind: str  # page_breaks | delimiter | explicit | single
    delimiter: str | None = None
    ranges: tuple[tuple[int, int], ...] = ()  # inclusive page index ranges

    def __post_init__(self):
        if self.kind not in ("page_breaks", "delimiter", "explicit", "single"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "delimiter" and not self.delimiter:
            raise ValueError("delimiter boundary needs a marker")
        if self.kind == "explicit" and not self.ranges:
            raise ValueError("explicit boundary needs page ranges")

    @classmethod
    def parse(cls, spec: str) -> "BoundarySpec":
        """Parse the wire form: ``page_breaks``, ``single``,
        ``delimiter:MARKER``, or ``explicit:0-1,2-2,3-5``."""
        if spec in ("page_breaks", "single"):
            return cls(kind=spec)
        if spec.startswith("delimiter:"):
            return cls(kind="delimiter", delimiter=spec.split(":", 1)[1])
        if spec.startswith("explicit:"):
            ranges = []
            for chunk in spec.split(":", 1)[1].split(","):
                first, _, last = chunk.partition("-")
                ranges.append((int(first), int(last or first)))
            return cls(kind="explicit", ranges=tuple(ranges))
        raise ValueError(f"cannot parse boundary spec {spec!r}")


@dataclass(frozen=True)
class HighlightSpan:
    sentence_id: str
    start: int
    end: int
    confidence: float


@dataclass(frozen=True)
class LetterAnalysis:
    letter_id: str
    total_sentences: int
    highlights: tuple[HighlightSpan, ...]
    proportion: Fraction  # exact; rendered to 4 decimals at the boundary

    def __post_init__(self):
        if self.total_sentences < 1:
            raise ValueError("a letter analysis needs at least one sentence")
        if self.proportion != Fraction(len(self.highlights), self.total_sentences):
            raise ValueError("proportion must equal highlights/total exactly")


@dataclass(frozen=True)
class ApplicantReport:
    applicant_id: str
    letters: tuple[LetterAnalysis, ...]
    micro_label_counts: dict[MicroLabel, int]
    summary: str
    summary_degraded: bool
    pipeline_version: str
    content_hash: str

    def __post_init__(self):
        if not self.letters:
            raise ValueError("a report needs at least one letter")


def content_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _letter_id(applicant_id: str, digest: str, index: int) -> str:
    seed = f"{applicant_id}\x00{digest}\x00{index}".encode("utf-8")
    return "L" + hashlib.sha256(seed).hexdigest()[:16]


def ingest_document(
    data: bytes,
    applicant_id: str,
    extractor: TextExtractor,
    boundary: BoundarySpec,
    writer_roles: Sequence[WriterRole] | None = None,
) -> Corpus:
    """Extract, partition into letters, and segment into sentences.

    Returns a corpus of letters and sentences (no labels). Letter and
    sentence ids derive from (applicant, content hash, position), so
    ingesting the same bytes twice yields identical records.
    """
    if not data:
        raise EmptyDocument("document is empty")
    pages = extractor.extract(data)
    if not any(page.strip() for page in pages):
        raise EmptyDocument("document produced no text")

    if boundary.kind == "single":
        parts = ["\n".join(pages)]
    elif boundary.kind == "page_breaks":
        parts = list(pages)
    elif boundary.kind == "delimiter":
        parts = "\n".join(pages).split(boundary.delimiter)  # type: ignore[arg-type]
    else:
        parts = []
        for first, last in boundary.ranges:
            if not (0 <= first <= last < len(pages)):
                raise BoundaryMismatch(
                    f"page range {first}-{last} out of bounds for {len(pages)} pages"
                )
            parts.append("\n".join(pages[first:last + 1]))

    parts = [part.strip() for part in parts]
    parts = [part for part in parts if part]
    if not parts:
        raise EmptyDocument("no letters found after applying the boundary spec")

    digest = content_digest(data)
    builder = CorpusBuilder()
    for index, text in enumerate(parts):
        letter_id = _letter_id(applicant_id, digest, index)
        role = (
            writer_roles[index]
            if writer_roles is not None and index < len(writer_roles)
            else WriterRole.UNKNOWN
        )
        sentences = segment_sentences(text, letter_id=letter_id)
        builder.add_letter(
            LetterDocument(
                letter_id=letter_id,
                applicant_id=applicant_id,
                writer_role=role,
                raw_text=text,
                sentence_ids=tuple(s.sentence_id for s in sentences),
            )
        )
        for sentence in sentences:
            builder.add_sentence(sentence)
    return builder.seal()


def analyze_letter(
    letter: LetterDocument,
    sentences: Sequence[SentenceRecord],
    classifier: ClassifierHandle,
) -> LetterAnalysis:
    """Classify every sentence; positives become highlight spans."""
    if not sentences:
        raise EmptyLetter(f"letter {letter.letter_id} has no sentences")
    predictions = classifier.predict_batch([s.text for s in sentences])
    highlights = tuple(
        HighlightSpan(
            sentence_id=s.sentence_id,
            start=s.start,
            end=s.end,
            confidence=p.confidence,
        )
        for s, p in zip(sentences, predictions)
        if p.label == 1
    )
    return LetterAnalysis(
        letter_id=letter.letter_id,
        total_sentences=len(sentences),
        highlights=highlights,
        proportion=Fraction(len(highlights), len(sentences)),
    )


ExtractFn = Callable[[SentenceRecord, MicroLabel], ExtractionResult]
SummarizeFn = Callable[[Mapping[str, Sequence[str]]], SummaryResult]


def build_report(
    applicant_id: str,
    ingested: Corpus,
    classifier: ClassifierHandle,
    extract_fn: ExtractFn,
    summarize_fn: SummarizeFn,
    pipeline_version: str,
    content_hash: str,
    trace_sink: Callable[[ExtractionResult], None] | None = None,
) -> ApplicantReport:
    """Assemble the per-applicant report.

    Phrase extraction runs only on classifier-positive sentences, once
    per micro-label. Failures carry the stage they happened in
    (classify | extract | summarize); ingestion failures surface from
    ingest_document before this point.
    """
    letters = list(ingested.letters.values())
    if not letters:
        raise EmptyDocument("no letters to analyze")

    analyses: list[LetterAnalysis] = []
    try:
        for letter in letters:
            analyses.append(
                analyze_letter(letter, ingested.sentences_of_letter(letter.letter_id), classifier)
            )
    except Exception as exc:
        raise StageError("classify", exc)

    results: list[ExtractionResult] = []
    phrases_by_letter: dict[str, list[str]] = {}
    try:
        for letter, analysis in zip(letters, analyses):
            collected: list[str] = []
            for span in analysis.highlights:
                sentence = ingested.sentences[span.sentence_id]
                for micro in MicroLabel.ordered():
                    result = extract_fn(sentence, micro)
                    results.append(result)
                    collected.extend(result.phrases)
                    if trace_sink is not None:
                        trace_sink(result)
            phrases_by_letter[letter.letter_id] = collected
    except Exception as exc:
        raise StageError("extract", exc)

    try:
        summary = summarize_fn(phrases_by_letter)
    except Exception as exc:
        raise StageError("summarize", exc)

    return ApplicantReport(
        applicant_id=applicant_id,
        letters=tuple(analyses),
        micro_label_counts=micro_label_distribution(results),
        summary=summary.text,
        summary_degraded=summary.degraded,
        pipeline_version=pipeline_version,
        content_hash=content_hash,
    )


# --- serialization ------------------------------------------------------------


def report_to_dict(report: ApplicantReport, corpus: Corpus) -> dict:
    """The canonical wire form: fractions as fixed 4-decimal strings."""
    return {
        "applicant_id": report.applicant_id,
        "content_hash": report.content_hash,
        "pipeline_version": report.pipeline_version,
        "letters": [
            {
                "letter_id": analysis.letter_id,
                "writer_role": corpus.letters[analysis.letter_id].writer_role.value,
                "total_sentences": analysis.total_sentences,
                "proportion": format_fraction(analysis.proportion),
                "highlights": [
                    {
                        "sentence_id": span.sentence_id,
                        "start": span.start,
                        "end": span.end,
                        "confidence": format_fraction(Fraction(span.confidence).limit_denominator(10**8)),
                    }
                    for span in analysis.highlights
                ],
            }
            for analysis in report.letters
        ],
        "micro_label_counts": {
            micro.value: count for micro, count in report.micro_label_counts.items()
        },
        "summary": report.summary,
        "summary_degraded": report.summary_degraded,
    }


def report_to_json(report: ApplicantReport, corpus: Corpus) -> str:
    return stable_json(report_to_dict(report, corpus)) + "\n"


def letter_payload(corpus: Corpus, letter_id: str, analysis: LetterAnalysis) -> dict:
    """The GET /letters/{id} body: raw text, sentence spans, highlights."""
    letter = corpus.letters[letter_id]
    return {
        "letter_id": letter_id,
        "applicant_id": letter.applicant_id,
        "writer_role": letter.writer_role.value,
        "raw_text": letter.raw_text,
        "sentences": [
            {
                "sentence_id": s.sentence_id,
                "start": s.start,
                "end": s.end,
                "text": s.text,
            }
            for s in corpus.sentences_of_letter(letter_id)
        ],
        "highlights": [
            {
                "sentence_id": span.sentence_id,
                "start": span.start,
                "end": span.end,
                "confidence": format_fraction(Fraction(span.confidence).limit_denominator(10**8)),
            }
            for span in analysis.highlights
        ],
    }

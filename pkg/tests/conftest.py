from __future__ import annotations

from pathlib import Path

import pytest

from lori.classify import LexiconClassifier
from lori.corpus import MicroLabel
from lori.extract import extract_micro_phrases, summarize
from lori.scripted import MappingExtractionClient, PolicyDriver, ScriptedVerifier, SequenceClient
from lori.service import ServiceRuntime
from lori.pipeline import FixtureExtractor

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

# Exactly 100 words; the golden report embeds it verbatim.
SCRIPTED_SUMMARY = (
    "Across three letters, Ming emerges as a steady leader whose teammates trust "
    "both the plan and the person behind it. Managers describe a skilled collaborator "
    "who led the team through two demanding launches without losing anyone along the way. "
    "Instructors highlight an innovator who challenged the status quo and embraces "
    "failure as fuel for better ideas rather than a reason to retreat. Colleagues add "
    "that Ming is an active listener who gives clear feedback, adapting easily to each "
    "new audience. Taken together, the evidence points to balanced strength across teamwork, "
    "communication, and innovation, with concrete examples supporting every claim made."
)

assert len(SCRIPTED_SUMMARY.split()) == 100

# What the scripted extraction model "finds" per (micro-label, sentence).
SCRIPTED_EXTRACTIONS = {
    (
        "teamwork",
        "He is an excellent communicator and a skilled collaborator when working on teams.",
    ): "skilled collaborator",
    (
        "communication",
        "He is an excellent communicator and a skilled collaborator when working on teams.",
    ): "excellent communicator",
    (
        "teamwork",
        "He led the team through two hard launches.",
    ): "led the team",
    (
        "innovation",
        "Ming challenged the status quo and embraces failure when testing new ideas.",
    ): "challenged the status quo; embraces failure",
    (
        "communication",
        "Ming is an active listener who gives clear feedback in code review.",
    ): "active listener; gives clear feedback",
}


def make_scripted_runtime() -> ServiceRuntime:
    """Lexicon classifier + scripted generative doubles; fully deterministic."""
    classifier = LexiconClassifier()
    extraction_client = MappingExtractionClient(SCRIPTED_EXTRACTIONS)
    verifier = ScriptedVerifier()
    summary_client = SequenceClient([SCRIPTED_SUMMARY], cycle=True)

    def extract_fn(sentence, micro: MicroLabel):
        return extract_micro_phrases(
            sentence, micro, PolicyDriver(), extraction_client, verifier
        )

    def summarize_fn(phrases_by_letter):
        return summarize(phrases_by_letter, summary_client)

    return ServiceRuntime(
        extractor=FixtureExtractor(),
        classifier=classifier,
        extract_fn=extract_fn,
        summarize_fn=summarize_fn,
        model_ids={
            "classifier": classifier.backend_id,
            "extraction": "scripted-extraction",
            "summary": "scripted-sequence",
        },
    )


@pytest.fixture
def corpus_small_dir() -> Path:
    return FIXTURES / "corpus_small"


@pytest.fixture
def three_letters_bytes() -> bytes:
    return (FIXTURES / "three_letters.txt").read_bytes()


@pytest.fixture
def scripted_runtime() -> ServiceRuntime:
    return make_scripted_runtime()

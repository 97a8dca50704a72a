"""Scripted generative clients.

These satisfy the ``GenerativeClient`` protocol without any model:
fixed-sequence replays for tests, a transcript-driven loop driver, and a
deterministic template summarizer used by the offline runtime. Each
client validates its own output against the grammar it was handed, the
same promise a constrained decoder gives.
"""

from __future__ import annotations

import re
from typing import Callable, Mapping, Sequence

from .corpus import MicroLabel
from .errors import ConstraintViolation
from .extract import (
    OutputGrammar,
    affirmation_text,
    parse_phrase_list,
    rejection_text,
)


class SequenceClient:
    """Replays a fixed list of responses, one per generate() call."""

    def __init__(self, responses: Sequence[str], model_id: str = "scripted-sequence",
                 cycle: bool = False):
        self.model_id = model_id
        self._responses = list(responses)
        self._cycle = cycle
        self._cursor = 0
        self.calls: list[str] = []

    def generate(self, prompt: str, constraints: OutputGrammar) -> str:
        self.calls.append(prompt)
        if self._cursor >= len(self._responses):
            if not self._cycle:
                raise RuntimeError("scripted client ran out of responses")
            self._cursor = 0
        text = self._responses[self._cursor]
        self._cursor += 1
        constraints.validate(text)
        return text


class MappingExtractionClient:
    """Answers extraction prompts by looking the sentence text up in a
    (micro-label, sentence text) table; unknown sentences extract nothing."""

    def __init__(self, table: Mapping[tuple[str, str], str], model_id: str = "scripted-extraction"):
        self._table = dict(table)
        self.model_id = model_id
        self.calls: list[str] = []

    def generate(self, prompt: str, constraints: OutputGrammar) -> str:
        self.calls.append(prompt)
        for (micro_value, sentence_text), response in self._table.items():
            if sentence_text in prompt and micro_value in prompt:
                constraints.validate(response)
                return response
        return ""


_MICRO_IN_PROMPT_RE = re.compile(r"is (?:a|an) (teamwork|communication|innovation) phrase")
_PHRASES_LINE_RE = re.compile(r"^Phrases:\s*(.*)$", re.MULTILINE)


class ScriptedVerifier:
    """Verification double: affirms or rejects each phrase via a decision
    callback (default: affirm everything). Sees only its own prompt."""

    def __init__(
        self,
        decide: Callable[[str, MicroLabel], bool] | None = None,
        model_id: str = "scripted-verifier",
    ):
        self._decide = decide or (lambda phrase, micro: True)
        self.model_id = model_id
        self.calls: list[str] = []

    def generate(self, prompt: str, constraints: OutputGrammar) -> str:
        self.calls.append(prompt)
        micro_match = _MICRO_IN_PROMPT_RE.search(prompt)
        phrases_match = _PHRASES_LINE_RE.search(prompt)
        if not micro_match or not phrases_match:
            raise ConstraintViolation("verification prompt not in the expected shape")
        micro = MicroLabel(micro_match.group(1))
        phrases = parse_phrase_list(phrases_match.group(1))
        items = [
            affirmation_text(p, micro) if self._decide(p, micro) else rejection_text(p, micro)
            for p in phrases
        ]
        text = "; ".join(items)
        constraints.validate(text)
        return text


_EVIDENCE_RE = re.compile(r"evidence of (teamwork|communication|innovation) skills")
_OBSERVATION_RE = re.compile(r"^Observation:\s*(.*)$", re.MULTILINE)


class PolicyDriver:
    """Loop driver double that always plays extract, then verify, then
    final, reading the transcript embedded in its prompt. Its canned
    thought lines are the canonical three-step script."""

    model_id = "scripted-driver"

    def generate(self, prompt: str, constraints: OutputGrammar) -> str:
        micro_match = _EVIDENCE_RE.search(prompt)
        if not micro_match:
            raise ConstraintViolation("driver prompt does not name a micro-label")
        micro = MicroLabel(micro_match.group(1))
        observations = _OBSERVATION_RE.findall(prompt)
        if not observations:
            text = (
                f"Thought: I should first extract phrases which contain skills "
                f"related to {micro.value}.\n"
                f"Action: extract_phrases()"
            )
        elif len(observations) == 1:
            text = (
                f"Thought: Are all the extracted phrases actually related to "
                f"{micro.value} skills? I should verify each of the extracted phrases.\n"
                f'Action: verify_{micro.value}("{observations[0]}")'
            )
        else:
            phrases = []
            for item in observations[-1].split(";"):
                item = item.strip()
                if (
                    item.endswith(f"{micro.value} phrase")
                    and " is not " not in item
                    and " is " in item
                ):
                    phrases.append(item[: item.rfind(" is ")])
            text = (
                "Thought: I now know the final answer.\n"
                f"Final Answer: {'; '.join(phrases)}"
            )
        constraints.validate(text)
        return text


_LETTER_LINE_RE = re.compile(r"^letter ([^:]+):\s*(.*)$", re.MULTILINE)

_FILLER_SENTENCES = (
    "Reviewers should weigh these signals against the full application file.",
    "The highlighted evidence is drawn only from verified phrases in the letters.",
    "Counts reflect distinct phrases, so repeated praise is not double counted.",
    "Letters differ in length, so proportions matter more than raw totals.",
)


class TemplateSummaryClient:
    """Deterministic ~100-word summaries for fully offline operation."""

    model_id = "template-summary"

    def generate(self, prompt: str, constraints: OutputGrammar) -> str:
        max_words = constraints.max_words or 120
        per_letter = _LETTER_LINE_RE.findall(prompt)
        phrases: list[str] = []
        for _letter_id, listed in per_letter:
            for phrase in parse_phrase_list(listed):
                if phrase != "(none)" and phrase not in phrases:
                    phrases.append(phrase)
        letters_with_evidence = sum(
            1 for _lid, listed in per_letter if parse_phrase_list(listed) and listed != "(none)"
        )
        lead = (
            f"Across {len(per_letter)} letters, {letters_with_evidence} contain "
            f"verified leadership evidence comprising {len(phrases)} distinct phrases."
        )
        if phrases:
            shown = phrases[:8]
            body = (
                "The recommenders describe the applicant as "
                + ", ".join(f'"{p}"' for p in shown)
                + "."
            )
        else:
            body = "No individual phrases survived verification."
        sentences = [lead, body]
        i = 0
        while len(" ".join(sentences).split()) < 80:
            sentences.append(_FILLER_SENTENCES[i % len(_FILLER_SENTENCES)])
            i += 1
        text = " ".join(sentences)
        words = text.split()
        if len(words) > max_words:
            text = " ".join(words[:max_words - 1]).rstrip(",;") + " overall."
        constraints.validate(text)
        return text

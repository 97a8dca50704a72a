"""Reasoning-loop phrase extraction per leadership micro-label, with an
isolated verification pass.

The driver model alternates Thought/Action/Observation steps: one action
extracts candidate phrases under a semicolon-list grammar, another hands
them to a verification session that sees only the phrases and the
micro-label definition, never the source sentence. Phrases that are not
literal substrings of the sentence are rejected before verification, and
a result carries exactly the phrases the verification tool affirmed.
Everything fails closed: broken grammar, missing verification, or an
unfinished loop all yield an empty, unverified result.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence

from ._util import read_ndjson, write_ndjson
from .corpus import MicroLabel, SentenceRecord
from .errors import ConstraintViolation, ToolMissing

AFFIRMED = "affirmed"
REJECTED = "rejected"

EXTRACT_TOOL = "extract_phrases"

FALLBACK_SUMMARY = "No leadership evidence was detected in the submitted letters."

MICRO_DEFINITIONS: dict[MicroLabel, str] = {
    MicroLabel.TEAMWORK: (
        "team building, collaborative work, coordinating plans and their "
        "execution, openness to diverse perspectives, or use of tools and "
        "platforms that facilitate working together"
    ),
    MicroLabel.COMMUNICATION: (
        "active listening, paraphrasing and encouraging elaboration, giving "
        "feedback, adapting communication to different audiences, overcoming "
        "communication barriers, or clear speaking and writing"
    ),
    MicroLabel.INNOVATION: (
        "spotting opportunities, generating and testing new ideas, rapid "
        "prototyping with user feedback, managing risk and uncertainty, "
        "embracing failure as part of the process, or connecting seemingly "
        "unrelated concepts"
    ),
}


@dataclass(frozen=True)
class OutputGrammar:
    """A constraint the client must decode under."""

    kind: str  # semicolon_phrase_list | bounded_prose
    max_items: int | None = None
    max_words: int | None = None

    def __post_init__(self):
        if self.kind not in ("semicolon_phrase_list", "bounded_prose"):
            raise ValueError(f"unknown grammar kind {self.kind!r}")

    def validate(self, text: str) -> None:
        if self.kind == "semicolon_phrase_list":
            items = [item for item in text.split(";") if item.strip()]
            if any("\n" in item.strip() for item in items):
                raise ConstraintViolation("newline inside a phrase-list item")
            if self.max_items is not None and len(items) > self.max_items:
                raise ConstraintViolation(
                    f"{len(items)} items exceed the limit of {self.max_items}"
                )
        else:
            words = len(text.split())
            if self.max_words is not None and words > self.max_words:
                raise ConstraintViolation(
                    f"{words} words exceed the limit of {self.max_words}"
                )


PHRASE_LIST_GRAMMAR = OutputGrammar("semicolon_phrase_list", max_items=16)
STEP_GRAMMAR = OutputGrammar("bounded_prose", max_words=200)
SUMMARY_GRAMMAR = OutputGrammar("bounded_prose", max_words=120)


class GenerativeClient(Protocol):
    model_id: str

    def generate(self, prompt: str, constraints: OutputGrammar) -> str: ...


@dataclass(frozen=True)
class ReActStep:
    index: int
    kind: str  # thought | action | observation | final
    content: str
    tool_call: tuple[str, str] | None = None

    def __post_init__(self):
        if self.kind not in ("thought", "action", "observation", "final"):
            raise ValueError(f"unknown step kind {self.kind!r}")
        if self.kind == "action" and self.tool_call is None:
            raise ValueError("action steps must carry a tool_call")


@dataclass(frozen=True)
class ExtractionResult:
    sentence_id: str
    micro_label: MicroLabel
    phrases: tuple[str, ...]
    trace: tuple[ReActStep, ...]
    verified: bool
    verification_prompts: tuple[str, ...] = ()


class ToolRegistry:
    """Named tools callable from the loop; carries the verification
    prompt log so runs are auditable afterwards."""

    def __init__(self):
        self._tools: dict[str, Callable[[str], str]] = {}
        self.verification_prompts: list[str] = []

    def register(self, name: str, fn: Callable[[str], str]) -> None:
        self._tools[name] = fn

    def __contains__(self, name: str) -> bool:
        return name in self._tools

    def get(self, name: str) -> Callable[[str], str]:
        if name not in self._tools:
            raise ToolMissing(f"tool {name!r} is not registered")
        return self._tools[name]

    def names(self) -> list[str]:
        return sorted(self._tools)


# --- prompt templates -------------------------------------------------------


class PromptTemplates:
    """Versioned prompt text shipped as data files, one extraction and
    one verification template per micro-label."""

    def __init__(self, root: str | Path | None = None):
        self._root = Path(root) if root is not None else None
        self.version = self._read("VERSION").strip()

    def _read(self, name: str) -> str:
        if self._root is not None:
            return (self._root / name).read_text(encoding="utf-8")
        return resources.files("lori.data.prompts").joinpath(name).read_text("utf-8")

    def extraction_prompt(self, micro: MicroLabel, sentence_text: str) -> str:
        return self._read(f"extract_{micro.value}.txt").replace("SENTENCE", sentence_text)

    def verification_prompt(self, micro: MicroLabel, phrases: Sequence[str]) -> str:
        return self._read(f"verify_{micro.value}.txt").replace("PHRASES", "; ".join(phrases))

    def react_prompt(
        self,
        micro: MicroLabel,
        sentence_text: str,
        transcript: str,
        tools: Sequence[str],
    ) -> str:
        text = self._read("react_loop.txt")
        text = text.replace("MICRO_LABEL", micro.value)
        text = text.replace("DEFINITION", MICRO_DEFINITIONS[micro])
        text = text.replace("SENTENCE", sentence_text)
        text = text.replace("TOOLS", ", ".join(tools))
        return text.replace("TRANSCRIPT", transcript)

    def summary_prompt(self, phrase_lines: str) -> str:
        return self._read("summary.txt").replace("PHRASE_LINES", phrase_lines)


_DEFAULT_TEMPLATES: PromptTemplates | None = None


def default_templates() -> PromptTemplates:
    global _DEFAULT_TEMPLATES
    if _DEFAULT_TEMPLATES is None:
        _DEFAULT_TEMPLATES = PromptTemplates()
    return _DEFAULT_TEMPLATES


# --- parsing helpers ---------------------------------------------------------


def parse_phrase_list(raw: str) -> list[str]:
    """Split on ';', trim, drop empties, dedupe keeping first occurrence."""
    seen: set[str] = set()
    out: list[str] = []
    for item in raw.split(";"):
        phrase = item.strip()
        if phrase and phrase not in seen:
            seen.add(phrase)
            out.append(phrase)
    return out


_WS_RE = re.compile(r"\s+")


def _normalize(text: str) -> str:
    return _WS_RE.sub(" ", text.casefold()).strip()


def is_grounded(phrase: str, sentence_text: str) -> bool:
    """The literalness gate: a candidate phrase must be a contiguous
    substring of its source sentence (case and whitespace folded)."""
    return _normalize(phrase) in _normalize(sentence_text)


def _article(micro: MicroLabel) -> str:
    return "an" if micro.value[0] in "aeiou" else "a"


def affirmation_text(phrase: str, micro: MicroLabel) -> str:
    return f"{phrase} is {_article(micro)} {micro.value} phrase"


def rejection_text(phrase: str, micro: MicroLabel) -> str:
    return f"{phrase} is not {_article(micro)} {micro.value} phrase"


def parse_verification_response(
    response: str,
    phrases: Sequence[str],
    micro: MicroLabel,
) -> list[str]:
    """One verdict per phrase, by position; anything that is not the
    exact affirmation wording counts as a rejection (fail closed)."""
    items = [item.strip() for item in response.split(";")]
    verdicts: list[str] = []
    for i, phrase in enumerate(phrases):
        item = items[i] if i < len(items) else ""
        expected = _normalize(affirmation_text(phrase, micro))
        verdicts.append(AFFIRMED if _normalize(item) == expected else REJECTED)
    return verdicts


# --- core operations ---------------------------------------------------------


def verify_phrases(
    phrases: Sequence[str],
    micro_label: MicroLabel,
    verification_client: GenerativeClient,
    templates: PromptTemplates | None = None,
    prompt_log: list[str] | None = None,
) -> list[str]:
    """Judge phrases with an isolated session.

    The prompt is constructed from the phrases and the micro-label
    definition alone; isolation from the extraction context is
    structural, not a convention, and every prompt is logged so the
    audit can prove it after the fact.
    """
    if not phrases:
        return []
    templates = templates or default_templates()
    prompt = templates.verification_prompt(micro_label, phrases)
    if prompt_log is not None:
        prompt_log.append(prompt)
    grammar = OutputGrammar("semicolon_phrase_list", max_items=max(len(phrases), 1))
    try:
        response = verification_client.generate(prompt, grammar)
        grammar.validate(response)
    except ConstraintViolation:
        return [REJECTED] * len(phrases)
    return parse_verification_response(response, phrases, micro_label)


def make_phrase_tools(
    sentence: SentenceRecord,
    micro_label: MicroLabel,
    extraction_client: GenerativeClient,
    verification_client: GenerativeClient,
    templates: PromptTemplates | None = None,
) -> ToolRegistry:
    """The standard two-tool registry: grammar-constrained extraction and
    isolated verification. The verification client must be a separate
    session object from the loop driver; it never sees the sentence."""
    templates = templates or default_templates()
    registry = ToolRegistry()

    def extract_phrases(args: str) -> str:
        prompt = templates.extraction_prompt(micro_label, sentence.text)
        try:
            out = extraction_client.generate(prompt, PHRASE_LIST_GRAMMAR)
            PHRASE_LIST_GRAMMAR.validate(out)
        except ConstraintViolation:
            return ""
        return out.strip()

    def verify(args: str) -> str:
        candidates = parse_phrase_list(args)
        grounded = [p for p in candidates if is_grounded(p, sentence.text)]
        verdicts = dict(
            zip(
                grounded,
                verify_phrases(
                    grounded,
                    micro_label,
                    verification_client,
                    templates,
                    registry.verification_prompts,
                ),
            )
        )
        items: list[str] = []
        for phrase in candidates:
            if phrase not in verdicts:
                items.append(f"{phrase} is not grounded in the source sentence")
            elif verdicts[phrase] == AFFIRMED:
                items.append(affirmation_text(phrase, micro_label))
            else:
                items.append(rejection_text(phrase, micro_label))
        return "; ".join(items)

    registry.register(EXTRACT_TOOL, extract_phrases)
    registry.register(f"verify_{micro_label.value}", verify)
    return registry


_ACTION_RE = re.compile(r"^Action:\s*([A-Za-z_]\w*)\s*\((.*)\)\s*$", re.DOTALL)


def _parse_driver_output(text: str) -> tuple[str, str | None, str | None, str | None]:
    """Split a driver turn into (thought, action name, action args, final)."""
    thought = None
    action_name = action_args = final = None
    lines = text.strip().splitlines()
    buffer: list[str] = []
    for line in lines:
        stripped = line.strip()
        if stripped.startswith("Thought:"):
            thought = stripped[len("Thought:"):].strip()
        elif stripped.startswith("Final Answer:"):
            final = stripped[len("Final Answer:"):].strip()
        elif stripped.startswith("Action:"):
            buffer.append(stripped)
        elif buffer:
            buffer.append(stripped)
    if buffer:
        match = _ACTION_RE.match("\n".join(buffer))
        if match:
            action_name = match.group(1)
            action_args = match.group(2).strip().strip('"').strip()
    if thought is None or (action_name is None and final is None):
        raise ConstraintViolation("driver turn must contain a Thought and an Action or Final Answer")
    return thought, action_name, action_args, final


def _render_transcript(steps: Sequence[ReActStep]) -> str:
    lines = []
    for step in steps:
        label = {"thought": "Thought", "action": "Action",
                 "observation": "Observation", "final": "Final Answer"}[step.kind]
        lines.append(f"{label}: {step.content}")
    return "\n".join(lines)


def run_react(
    sentence: SentenceRecord,
    micro_label: MicroLabel,
    client: GenerativeClient,
    tools: ToolRegistry,
    max_steps: int = 8,
    templates: PromptTemplates | None = None,
) -> ExtractionResult:
    """Drive the Thought/Action/Observation loop to a final answer.

    The result's phrases are exactly those the verification tool
    affirmed, in extraction order; the model's own final-answer text is
    never trusted directly. Two consecutive grammar violations, a
    missing final step, or hitting the step budget all abort with an
    empty unverified result.
    """
    if max_steps < 3:
        raise ValueError("max_steps must be at least 3")
    verify_tool = f"verify_{micro_label.value}"
    if verify_tool not in tools:
        raise ToolMissing(f"tool {verify_tool!r} is not registered")
    templates = templates or default_templates()

    steps: list[ReActStep] = []
    affirmed: list[str] = []
    violations = 0
    completed = False

    def result() -> ExtractionResult:
        return ExtractionResult(
            sentence_id=sentence.sentence_id,
            micro_label=micro_label,
            phrases=tuple(affirmed) if completed else (),
            trace=tuple(steps),
            verified=completed,
            verification_prompts=tuple(tools.verification_prompts),
        )

    while True:
        prompt = templates.react_prompt(
            micro_label, sentence.text, _render_transcript(steps), tools.names()
        )
        try:
            output = client.generate(prompt, STEP_GRAMMAR)
            STEP_GRAMMAR.validate(output)
            thought, action_name, action_args, final = _parse_driver_output(output)
        except ConstraintViolation:
            violations += 1
            if violations >= 2:
                return result()
            continue
        violations = 0

        needed = 2 if final is not None else 3
        if len(steps) + needed > max_steps:
            return result()

        steps.append(ReActStep(index=len(steps), kind="thought", content=thought))
        if final is not None:
            steps.append(ReActStep(index=len(steps), kind="final", content=final))
            completed = True
            return result()

        call = (action_name, action_args or "")
        steps.append(
            ReActStep(index=len(steps), kind="action", content=f"{action_name}({action_args})",
                      tool_call=call)
        )
        observation = tools.get(action_name)(action_args or "")
        steps.append(ReActStep(index=len(steps), kind="observation", content=observation))

        if action_name == verify_tool:
            candidates = parse_phrase_list(action_args or "")
            verdicts = parse_verification_response(observation, candidates, micro_label)
            affirmed = [p for p, v in zip(candidates, verdicts) if v == AFFIRMED]


def extract_micro_phrases(
    sentence: SentenceRecord,
    micro_label: MicroLabel,
    driver_client: GenerativeClient,
    extraction_client: GenerativeClient,
    verification_client: GenerativeClient,
    max_steps: int = 8,
    templates: PromptTemplates | None = None,
) -> ExtractionResult:
    """Convenience wrapper: standard tools plus the loop in one call."""
    tools = make_phrase_tools(
        sentence, micro_label, extraction_client, verification_client, templates
    )
    return run_react(sentence, micro_label, driver_client, tools, max_steps, templates)


# --- downstream aggregation ---------------------------------------------------


def micro_label_distribution(results: Sequence[ExtractionResult]) -> dict[MicroLabel, int]:
    """Verified phrase counts per micro-label (zeros included)."""
    counts = {micro: 0 for micro in MicroLabel.ordered()}
    for result in results:
        counts[result.micro_label] += len(result.phrases)
    return counts


@dataclass(frozen=True)
class SummaryResult:
    text: str
    degraded: bool = False
    word_count: int = 0


def summarize(
    phrases_by_letter: Mapping[str, Sequence[str]],
    client: GenerativeClient,
    grammar: OutputGrammar = SUMMARY_GRAMMAR,
    templates: PromptTemplates | None = None,
) -> SummaryResult:
    """Cross-letter summary of verified phrases, bounded to ~100 words.

    With no phrases at all the deterministic fallback text is returned
    without any client call. A client that breaks the word bound gets
    one retry, then the fallback with the degraded flag set.
    """
    if all(not phrases for phrases in phrases_by_letter.values()):
        return SummaryResult(text=FALLBACK_SUMMARY, degraded=False,
                             word_count=len(FALLBACK_SUMMARY.split()))
    templates = templates or default_templates()
    lines = "\n".join(
        f"letter {letter_id}: {'; '.join(phrases) if phrases else '(none)'}"
        for letter_id, phrases in sorted(phrases_by_letter.items())
    )
    prompt = templates.summary_prompt(lines)
    for _ in range(2):
        try:
            text = client.generate(prompt, grammar)
            grammar.validate(text)
            return SummaryResult(text=text, degraded=False, word_count=len(text.split()))
        except ConstraintViolation:
            continue
    return SummaryResult(text=FALLBACK_SUMMARY, degraded=True,
                         word_count=len(FALLBACK_SUMMARY.split()))


# --- audit ---------------------------------------------------------------------


def audit_verification_isolation(
    prompts: Sequence[str],
    sentence_text: str,
    allowed_phrases: Sequence[str],
    min_length: int = 15,
) -> list[str]:
    """Find source-sentence leakage in verification prompts.

    The phrases under verification are the verifier's legitimate input,
    so they are scrubbed first; any remaining shared substring of at
    least ``min_length`` characters means sentence context leaked into
    the supposedly isolated session. Returns the offending substrings
    (empty list = clean).
    """
    leaks: list[str] = []
    for prompt in prompts:
        scrubbed = prompt
        for phrase in sorted(set(allowed_phrases), key=len, reverse=True):
            if phrase:
                scrubbed = scrubbed.replace(phrase, "\x00")
        for i in range(0, max(0, len(sentence_text) - min_length + 1)):
            chunk = sentence_text[i:i + min_length]
            if chunk in scrubbed:
                leaks.append(chunk)
                break
    return leaks


# --- deterministic lexicon engine ----------------------------------------------


def lexicon_extraction(
    sentence: SentenceRecord,
    micro_label: MicroLabel,
    library=None,
) -> ExtractionResult:
    """Phrase extraction without a generative model: library matches,
    verified by construction (every match is a literal in-library
    substring of the sentence). Produces a well-formed trace so the
    downstream audit trail looks the same either way."""
    from .classify import lexicon_predict, load_phrase_library

    library = library or load_phrase_library()
    _, matches = lexicon_predict(sentence.text, library)
    spans: list[tuple[int, int]] = []
    phrases: list[str] = []
    for micro, _phrase, (start, end) in matches:
        if micro == micro_label and (start, end) not in spans:
            spans.append((start, end))
            literal = sentence.text[start:end]
            if literal not in phrases:
                phrases.append(literal)
    phrases.sort(key=lambda p: sentence.text.lower().find(p.lower()))
    listed = "; ".join(phrases)
    steps = [
        ReActStep(0, "thought",
                  f"Match the sentence against the {micro_label.value} phrase library."),
        ReActStep(1, "action", f"lexicon_match({micro_label.value})",
                  tool_call=("lexicon_match", micro_label.value)),
        ReActStep(2, "observation", listed if listed else "(no matches)"),
        ReActStep(3, "final", listed),
    ]
    return ExtractionResult(
        sentence_id=sentence.sentence_id,
        micro_label=micro_label,
        phrases=tuple(phrases),
        trace=tuple(steps),
        verified=True,
        verification_prompts=(),
    )


# --- trace persistence -----------------------------------------------------------


def save_trace(result: ExtractionResult, path: str | Path) -> None:
    """Append-style trace log: one step record per line."""
    write_ndjson(
        path,
        (
            {
                "index": step.index,
                "kind": step.kind,
                "content": step.content,
                "tool_call": list(step.tool_call) if step.tool_call else None,
            }
            for step in result.trace
        ),
    )


def load_trace(path: str | Path) -> list[ReActStep]:
    return [
        ReActStep(
            index=rec["index"],
            kind=rec["kind"],
            content=rec["content"],
            tool_call=tuple(rec["tool_call"]) if rec.get("tool_call") else None,
        )
        for _, rec in read_ndjson(path)
    ]

"""Weak supervision: labeling functions vote on unlabeled sentences, a
confidence-gated strict-majority rule aggregates the votes, and the
surviving labels form the large machine-annotated training set.

Gating happens at aggregation time, not at vote time: every vote is
recorded verbatim so coverage/overlap/conflict reporting can see below
the thresholds. A sentence with a tied or empty counting-vote set is
excluded rather than guessed at, and applicants who contributed any
human-labeled sentence are removed up front so the weak set never leaks
into evaluation data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Protocol, Sequence

from ._util import read_ndjson, write_ndjson
from .classify import TrainExample
from .corpus import Corpus, SentenceRecord

ABSTAIN = "ABSTAIN"

RULE_VERSION = "gated-majority/1"


class _Excluded:
    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover - repr only
        return "EXCLUDED"


EXCLUDED = _Excluded()


@dataclass(frozen=True)
class LabelVote:
    lf_id: str
    verdict: int | str  # 0, 1, or ABSTAIN
    confidence: float
    note: str = ""

    def __post_init__(self):
        if self.verdict not in (0, 1, ABSTAIN):
            raise ValueError(f"verdict must be 0, 1, or ABSTAIN, got {self.verdict!r}")
        if self.verdict == ABSTAIN and self.confidence != 0.0:
            raise ValueError("abstaining votes carry confidence 0")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence out of [0, 1]")


@dataclass(frozen=True)
class ThresholdPolicy:
    """Per-LF minimum confidence; None disables gating for that LF."""

    thresholds: Mapping[str, float | None]

    def __post_init__(self):
        for lf_id, value in self.thresholds.items():
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"threshold for {lf_id} out of [0, 1]")

    def counts(self, vote: LabelVote) -> bool:
        if vote.verdict == ABSTAIN:
            return False
        threshold = self.thresholds[vote.lf_id]
        return threshold is None or vote.confidence >= threshold

    @classmethod
    def for_lfs(cls, lfs: Sequence["LabelingFunction"], default: float | None = None) -> "ThresholdPolicy":
        return cls({lf.lf_id: default for lf in lfs})


@dataclass(frozen=True)
class WeakLabelRecord:
    sentence_id: str
    label: int
    contributing_votes: tuple[LabelVote, ...]
    rule_version: str = RULE_VERSION


@dataclass(frozen=True)
class CoverageReport:
    considered: int
    per_lf_coverage: dict[str, float]
    pairwise_overlap: dict[tuple[str, str], float]
    pairwise_conflict: dict[tuple[str, str], float]
    excluded_count: int             # gated/tied at aggregation
    applicant_filtered_count: int   # removed before voting
    vote_histograms: dict[str, dict[str, int]] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "considered": self.considered,
            "per_lf_coverage": dict(self.per_lf_coverage),
            "pairwise_overlap": {"|".join(k): v for k, v in self.pairwise_overlap.items()},
            "pairwise_conflict": {"|".join(k): v for k, v in self.pairwise_conflict.items()},
            "excluded_count": self.excluded_count,
            "applicant_filtered_count": self.applicant_filtered_count,
            "vote_histograms": {k: dict(v) for k, v in self.vote_histograms.items()},
        }


class LabelingFunction(Protocol):
    lf_id: str
    shareable: bool

    def vote(self, sentence: SentenceRecord) -> LabelVote: ...


def apply_labeling_functions(
    sentences: Sequence[SentenceRecord],
    lfs: Sequence[LabelingFunction],
    policy: ThresholdPolicy,
) -> dict[str, list[LabelVote]]:
    """Record one vote per (sentence, LF), verbatim.

    An LF that raises on one sentence degrades to an ABSTAIN with the
    error noted; a 250k-sentence batch must survive individual faults.
    Gating is applied later, at aggregation.
    """
    missing = [lf.lf_id for lf in lfs if lf.lf_id not in policy.thresholds]
    if missing:
        raise ValueError(f"policy does not cover labeling functions: {missing}")
    votes: dict[str, list[LabelVote]] = {}
    for sentence in sentences:
        row: list[LabelVote] = []
        for lf in lfs:
            try:
                vote = lf.vote(sentence)
                if vote.lf_id != lf.lf_id:
                    raise ValueError(f"vote lf_id {vote.lf_id!r} != {lf.lf_id!r}")
            except Exception as exc:
                vote = LabelVote(lf_id=lf.lf_id, verdict=ABSTAIN, confidence=0.0,
                                 note=f"error: {exc}")
            row.append(vote)
        votes[sentence.sentence_id] = row
    return votes


def aggregate(
    sentence_id: str,
    votes: Sequence[LabelVote],
    policy: ThresholdPolicy,
) -> WeakLabelRecord | _Excluded:
    """Confidence-gated strict majority; ties and empty gates exclude.

    A vote counts iff it did not abstain and meets its LF's threshold
    (when one is set). The label is the strict majority of counting
    votes; ambiguity yields EXCLUDED rather than a guess.
    """
    counting = tuple(v for v in votes if policy.counts(v))
    ones = sum(1 for v in counting if v.verdict == 1)
    zeros = len(counting) - ones
    if ones == zeros:
        return EXCLUDED
    return WeakLabelRecord(
        sentence_id=sentence_id,
        label=1 if ones > zeros else 0,
        contributing_votes=counting,
    )


def build_weak_dataset(
    corpus: Corpus,
    lfs: Sequence[LabelingFunction],
    policy: ThresholdPolicy,
    excluded_applicants: set[str],
) -> tuple[list[WeakLabelRecord], CoverageReport]:
    """Vote, aggregate, and report coverage over one unlabeled corpus.

    ``excluded_applicants`` must hold the applicant ids of all
    human-labeled data; their sentences never enter the weak set. The
    result is invariant to LF ordering: aggregation is a reduction over
    the vote set and the report is keyed by lf_id.
    """
    considered: list[SentenceRecord] = []
    filtered = 0
    for sentence_id in sorted(corpus.sentences):
        sentence = corpus.sentences[sentence_id]
        if corpus.applicant_of(sentence_id) in excluded_applicants:
            filtered += 1
        else:
            considered.append(sentence)

    votes = apply_labeling_functions(considered, lfs, policy)

    records: list[WeakLabelRecord] = []
    excluded = 0
    for sentence in considered:
        outcome = aggregate(sentence.sentence_id, votes[sentence.sentence_id], policy)
        if outcome is EXCLUDED:
            excluded += 1
        else:
            records.append(outcome)

    lf_ids = sorted(lf.lf_id for lf in lfs)
    n = len(considered)
    counting_by_lf: dict[str, dict[str, LabelVote]] = {lf_id: {} for lf_id in lf_ids}
    histograms: dict[str, dict[str, int]] = {
        lf_id: {"0": 0, "1": 0, ABSTAIN: 0} for lf_id in lf_ids
    }
    for sentence in considered:
        for vote in votes[sentence.sentence_id]:
            histograms[vote.lf_id][str(vote.verdict)] += 1
            if policy.counts(vote):
                counting_by_lf[vote.lf_id][sentence.sentence_id] = vote

    coverage = {
        lf_id: (len(counting_by_lf[lf_id]) / n if n else 0.0) for lf_id in lf_ids
    }
    overlap: dict[tuple[str, str], float] = {}
    conflict: dict[tuple[str, str], float] = {}
    for i, a in enumerate(lf_ids):
        for b in lf_ids[i + 1:]:
            both = set(counting_by_lf[a]) & set(counting_by_lf[b])
            overlap[(a, b)] = len(both) / n if n else 0.0
            if both:
                differing = sum(
                    1 for sid in both
                    if counting_by_lf[a][sid].verdict != counting_by_lf[b][sid].verdict
                )
                conflict[(a, b)] = differing / len(both)
            else:
                conflict[(a, b)] = 0.0

    report = CoverageReport(
        considered=n,
        per_lf_coverage=coverage,
        pairwise_overlap=overlap,
        pairwise_conflict=conflict,
        excluded_count=excluded,
        applicant_filtered_count=filtered,
        vote_histograms=histograms,
    )
    return records, report


# --- persistence -----------------------------------------------------------


def save_weak_dataset(
    records: Sequence[WeakLabelRecord],
    corpus: Corpus,
    path: str | Path,
) -> int:
    return write_ndjson(
        path,
        (
            {
                "sentence_id": r.sentence_id,
                "text": corpus.sentences[r.sentence_id].text,
                "label": r.label,
                "rule_version": r.rule_version,
            }
            for r in records
        ),
    )


def load_weak_examples(path: str | Path) -> list[TrainExample]:
    return [
        TrainExample(text=rec["text"], label=int(rec["label"]))
        for _, rec in read_ndjson(path)
    ]


# --- shipped labeling functions ----------------------------------------------


class ScriptedLF:
    """Replays a fixed vote table; the default for uncovered sentences is
    an abstain. Useful for tests and for auditing aggregation behavior."""

    shareable = True

    def __init__(self, lf_id: str, table: Mapping[str, tuple[int | str, float]]):
        self.lf_id = lf_id
        self._table = dict(table)

    def vote(self, sentence: SentenceRecord) -> LabelVote:
        verdict, confidence = self._table.get(sentence.sentence_id, (ABSTAIN, 0.0))
        return LabelVote(lf_id=self.lf_id, verdict=verdict, confidence=confidence)

    @classmethod
    def from_file(cls, lf_id: str, path: str | Path) -> "ScriptedLF":
        import json

        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        table = {
            sid: (entry["verdict"], float(entry.get("confidence", 0.0)))
            for sid, entry in doc.items()
        }
        return cls(lf_id, table)


class EmbeddingFewShotLF:
    """Few-shot nearest-centroid classifier over hashed token embeddings.

    Fit from a small labeled seed set; votes with a confidence derived
    from the cosine margin between the two class centroids.
    """

    shareable = True

    def __init__(self, lf_id: str, centroids, dim: int = 256):
        self.lf_id = lf_id
        self._centroids = centroids  # {label: unit vector}
        self._dim = dim

    @staticmethod
    def _embed(text: str, dim: int):
        import numpy as np

        vec = np.zeros(dim)
        for token in text.lower().split():
            for n in (token, token[:4], token[-4:]):
                vec[hash_token(n) % dim] += 1.0
        norm = float(np.linalg.norm(vec))
        return vec / norm if norm > 0 else vec

    @classmethod
    def fit(cls, examples: Sequence[TrainExample], lf_id: str = "fewshot-embed", dim: int = 256):
        import numpy as np

        by_label: dict[int, list] = {0: [], 1: []}
        for ex in examples:
            by_label[ex.label].append(cls._embed(ex.text, dim))
        if not by_label[0] or not by_label[1]:
            raise ValueError("few-shot seed set needs both classes")
        centroids = {}
        for label, rows in by_label.items():
            centroid = np.mean(rows, axis=0)
            norm = float(np.linalg.norm(centroid))
            centroids[label] = centroid / norm if norm > 0 else centroid
        return cls(lf_id, centroids, dim)

    def vote(self, sentence: SentenceRecord) -> LabelVote:
        import numpy as np

        vec = self._embed(sentence.text, self._dim)
        if not np.any(vec):
            return LabelVote(self.lf_id, ABSTAIN, 0.0)
        sims = {label: float(vec @ c) for label, c in self._centroids.items()}
        verdict = 1 if sims[1] >= sims[0] else 0
        margin = abs(sims[1] - sims[0])
        confidence = min(1.0, 0.5 + margin / 2)
        return LabelVote(self.lf_id, verdict, confidence)


def hash_token(token: str) -> int:
    """Stable token hash (Python's hash() is salted per process)."""
    value = 2166136261
    for ch in token.encode("utf-8"):
        value = (value ^ ch) * 16777619 % (1 << 32)
    return value


class SentenceModelLF:
    """Adapter exposing any trained sentence classifier as an LF; the
    production configuration backs this with the fine-tuned transformer."""

    def __init__(self, handle, lf_id: str = "sentence-model"):
        self.lf_id = lf_id
        self._handle = handle
        self.shareable = True

    def vote(self, sentence: SentenceRecord) -> LabelVote:
        pred = self._handle.predict(sentence.text)
        confidence = max(pred.confidence, 1.0 - pred.confidence)
        return LabelVote(self.lf_id, pred.label, confidence)


class ForestLF:
    """Random forest over the 119 normalized linguistic features."""

    shareable = True

    def __init__(self, lf_id, forest, tagger, registry, stats):
        self.lf_id = lf_id
        self._forest = forest
        self._tagger = tagger
        self._registry = registry
        self._stats = stats

    @classmethod
    def fit(
        cls,
        sentences: Sequence[SentenceRecord],
        labels: Sequence[int],
        tagger,
        registry,
        seed: int = 0,
        lf_id: str = "feature-forest",
        n_estimators: int = 100,
    ) -> "ForestLF":
        from sklearn.ensemble import RandomForestClassifier

        from .lingfeat import apply_normalizer, extract_features, fit_normalizer

        raw = [extract_features(s, tagger, registry) for s in sentences]
        stats = fit_normalizer(raw)
        matrix = [apply_normalizer(v, stats).values for v in raw]
        forest = RandomForestClassifier(n_estimators=n_estimators, random_state=seed)
        forest.fit(matrix, list(labels))
        return cls(lf_id, forest, tagger, registry, stats)

    def vote(self, sentence: SentenceRecord) -> LabelVote:
        from .lingfeat import apply_normalizer, extract_features

        vec = apply_normalizer(
            extract_features(sentence, self._tagger, self._registry), self._stats
        )
        proba = self._forest.predict_proba([list(vec.values)])[0]
        verdict = int(proba[1] >= proba[0])
        return LabelVote(self.lf_id, verdict, float(max(proba)))

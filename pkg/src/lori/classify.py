"""Binary leadership-sentence classifiers behind one handle interface.

Two trainable backends: ``lightweight`` (hashed bag-of-words + logistic
regression; deterministic, no accelerator, the backend every test runs
on) and ``transformer`` (fine-tunes a pretrained encoder when its
weights are available locally; optional at desk scale). A deterministic
phrase-library baseline rounds out the set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from ._util import atomic_write_text, stable_json
from .corpus import MicroLabel
from .errors import BackendUnavailable, SingleClassTrainingSet, SizeExceedsDataset
from .evalmetrics import weighted_metrics

FEATURE_SPACE_ID = "hashing-word12-2^18/v1"


@dataclass(frozen=True)
class ScoredLabel:
    label: int
    confidence: float  # positive-class probability

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError("label must be 0 or 1")


def scored(confidence: float, threshold: float) -> ScoredLabel:
    """Build a ScoredLabel honoring label == (confidence >= threshold)."""
    return ScoredLabel(label=int(confidence >= threshold), confidence=float(confidence))


@dataclass(frozen=True)
class TrainConfig:
    backend: str = "lightweight"
    seed: int = 0
    epochs: int = 3
    decision_threshold: float = 0.5
    max_train_rows: int | None = None
    pretrained_name: str = "distilroberta-base"

    def __post_init__(self):
        if not 0.0 < self.decision_threshold < 1.0:
            raise ValueError("decision_threshold must lie in (0, 1)")
        if self.backend not in ("lightweight", "transformer"):
            raise ValueError(f"unknown backend {self.backend!r}")


@dataclass(frozen=True)
class TrainExample:
    text: str
    label: int


class ClassifierHandle(Protocol):
    backend_id: str
    decision_threshold: float

    def predict(self, text: str) -> ScoredLabel: ...

    def predict_batch(self, texts: Sequence[str]) -> list[ScoredLabel]: ...

    def manifest(self) -> dict: ...


# --- phrase library -------------------------------------------------------


@dataclass(frozen=True)
class PhraseLibrary:
    phrases: dict[MicroLabel, tuple[str, ...]]

    def __post_init__(self):
        for micro, items in self.phrases.items():
            if not items:
                raise ValueError(f"phrase list for {micro.value} must be non-empty")
            if len(set(items)) != len(items):
                raise ValueError(f"duplicate phrases under {micro.value}")
            if any(not p for p in items):
                raise ValueError(f"empty phrase under {micro.value}")


def load_phrase_library(path: str | Path | None = None) -> PhraseLibrary:
    if path is None:
        raw = resources.files("lori.data").joinpath("phrase_library.json").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    doc = json.loads(raw)
    return PhraseLibrary(
        phrases={MicroLabel(k): tuple(v) for k, v in doc.items()}
    )


def lexicon_predict(
    text: str,
    library: PhraseLibrary,
) -> tuple[int, list[tuple[MicroLabel, str, tuple[int, int]]]]:
    """Case-insensitive whole-phrase substring matching.

    Returns every occurrence of every library phrase, as (micro-label,
    phrase, span) with spans indexing the original text. Label is 1 iff
    anything matched.
    """
    lowered = text.lower()
    matches: list[tuple[MicroLabel, str, tuple[int, int]]] = []
    for micro in MicroLabel.ordered():
        for phrase in library.phrases.get(micro, ()):
            needle = phrase.lower()
            start = lowered.find(needle)
            while start != -1:
                matches.append((micro, phrase, (start, start + len(needle))))
                start = lowered.find(needle, start + 1)
    return (1 if matches else 0), matches


class LexiconClassifier:
    """Deterministic baseline handle: positive iff a library phrase occurs."""

    backend_id = "lexicon/1"

    def __init__(self, library: PhraseLibrary | None = None, decision_threshold: float = 0.5):
        self.library = library or load_phrase_library()
        self.decision_threshold = decision_threshold

    def predict(self, text: str) -> ScoredLabel:
        if not text.strip():
            return ScoredLabel(0, 0.0)
        label, matches = lexicon_predict(text, self.library)
        return scored(1.0 if label else 0.0, self.decision_threshold)

    def predict_batch(self, texts: Sequence[str]) -> list[ScoredLabel]:
        return [self.predict(t) for t in texts]

    def manifest(self) -> dict:
        return {
            "backend": self.backend_id,
            "decision_threshold": self.decision_threshold,
            "phrase_counts": {m.value: len(v) for m, v in self.library.phrases.items()},
        }


# --- lightweight backend ----------------------------------------------------


class LightweightClassifier:
    """Hashed word 1-2 gram features into a logistic regression.

    Bitwise deterministic for a fixed (seed, data) pair; trains in
    seconds on a laptop-scale corpus.
    """

    backend_id = "lightweight/1"

    def __init__(self, vectorizer, model, config: TrainConfig):
        self._vectorizer = vectorizer
        self._model = model
        self.config = config
        self.decision_threshold = config.decision_threshold

    def predict(self, text: str) -> ScoredLabel:
        return self.predict_batch([text])[0]

    def predict_batch(self, texts: Sequence[str]) -> list[ScoredLabel]:
        out: list[ScoredLabel] = []
        nonempty_idx = [i for i, t in enumerate(texts) if t.strip()]
        probs: dict[int, float] = {}
        if nonempty_idx:
            matrix = self._vectorizer.transform([texts[i] for i in nonempty_idx])
            positive = self._model.predict_proba(matrix)[:, 1]
            probs = {i: float(p) for i, p in zip(nonempty_idx, positive)}
        for i, text in enumerate(texts):
            if i in probs:
                out.append(scored(probs[i], self.decision_threshold))
            else:
                # documented convention: empty text is a confident negative
                out.append(ScoredLabel(0, 0.0))
        return out

    def manifest(self) -> dict:
        return {
            "backend": self.backend_id,
            "seed": self.config.seed,
            "decision_threshold": self.decision_threshold,
            "feature_space": FEATURE_SPACE_ID,
        }


def _train_lightweight(examples: Sequence[TrainExample], config: TrainConfig) -> LightweightClassifier:
    from sklearn.feature_extraction.text import HashingVectorizer
    from sklearn.linear_model import LogisticRegression

    vectorizer = HashingVectorizer(
        analyzer="word",
        ngram_range=(1, 2),
        n_features=2**18,
        alternate_sign=False,
        lowercase=True,
        norm="l2",
    )
    matrix = vectorizer.transform([ex.text for ex in examples])
    labels = np.array([ex.label for ex in examples])
    model = LogisticRegression(
        solver="lbfgs",
        max_iter=1000,
        random_state=config.seed,
        C=4.0,
    )
    model.fit(matrix, labels)
    return LightweightClassifier(vectorizer, model, config)


def _train_transformer(examples: Sequence[TrainExample], config: TrainConfig):
    """Fine-tune a local pretrained encoder; unavailable without weights.

    Weights are loaded with local_files_only so a desk run never stalls
    on a download; point pretrained_name at a local checkout to use it.
    """
    try:
        import torch
        from transformers import (
            AutoModelForSequenceClassification,
            AutoTokenizer,
        )
    except ImportError as exc:  # pragma: no cover - env without torch
        raise BackendUnavailable(f"transformer backend needs torch+transformers: {exc}")

    try:
        tokenizer = AutoTokenizer.from_pretrained(config.pretrained_name, local_files_only=True)
        model = AutoModelForSequenceClassification.from_pretrained(
            config.pretrained_name, num_labels=2, local_files_only=True
        )
    except Exception as exc:
        raise BackendUnavailable(
            f"pretrained weights for {config.pretrained_name!r} not available locally: {exc}"
        )

    torch.manual_seed(config.seed)
    device = "cuda" if torch.cuda.is_available() else "cpu"
    model.to(device).train()
    optimizer = torch.optim.AdamW(model.parameters(), lr=2e-5)
    batch_size = 16
    for _ in range(config.epochs):
        for start in range(0, len(examples), batch_size):
            batch = examples[start:start + batch_size]
            enc = tokenizer(
                [ex.text for ex in batch],
                truncation=True,
                padding=True,
                max_length=128,
                return_tensors="pt",
            ).to(device)
            labels = torch.tensor([ex.label for ex in batch], device=device)
            loss = model(**enc, labels=labels).loss
            loss.backward()
            optimizer.step()
            optimizer.zero_grad()
    model.eval()
    return TransformerClassifier(tokenizer, model, config)


class TransformerClassifier:
    backend_id = "transformer/1"

    def __init__(self, tokenizer, model, config: TrainConfig):
        self._tokenizer = tokenizer
        self._model = model
        self.config = config
        self.decision_threshold = config.decision_threshold

    def predict(self, text: str) -> ScoredLabel:
        return self.predict_batch([text])[0]

    def predict_batch(self, texts: Sequence[str]) -> list[ScoredLabel]:
        import torch

        out: list[ScoredLabel] = []
        for text in texts:
            if not text.strip():
                out.append(ScoredLabel(0, 0.0))
                continue
            enc = self._tokenizer(text, truncation=True, max_length=128, return_tensors="pt")
            with torch.no_grad():
                logits = self._model(**enc).logits[0]
            prob = torch.softmax(logits, dim=-1)[1].item()
            out.append(scored(prob, self.decision_threshold))
        return out

    def manifest(self) -> dict:
        return {
            "backend": self.backend_id,
            "seed": self.config.seed,
            "decision_threshold": self.decision_threshold,
            "pretrained_name": self.config.pretrained_name,
        }


# --- training entry points ---------------------------------------------------


def train_classifier(examples: Sequence[TrainExample], config: TrainConfig) -> ClassifierHandle:
    if config.max_train_rows is not None:
        examples = list(examples)[: config.max_train_rows]
    if not examples:
        raise SingleClassTrainingSet("training set is empty")
    labels = {ex.label for ex in examples}
    if labels != {0, 1}:
        raise SingleClassTrainingSet(f"training set contains only class {labels!r}")
    if config.backend == "lightweight":
        return _train_lightweight(examples, config)
    return _train_transformer(examples, config)


def predict(handle: ClassifierHandle, text: str) -> ScoredLabel:
    return handle.predict(text)


def predict_batch(handle: ClassifierHandle, texts: Sequence[str]) -> list[ScoredLabel]:
    return handle.predict_batch(texts)


def learning_curve(
    dataset: Sequence[TrainExample],
    sizes: Sequence[int],
    eval_set: Sequence[TrainExample],
    config: TrainConfig,
) -> list[dict]:
    """Train on seeded prefix samples of increasing size and evaluate each.

    The dataset is shuffled once with the config seed; each row trains on
    the first `size` rows of that shuffle. F1 trends are reported, not
    asserted: more weak data usually helps, but that is an empirical
    observation, not a contract.
    """
    if list(sizes) != sorted(sizes):
        raise ValueError("sizes must be ascending")
    for size in sizes:
        if size > len(dataset):
            raise SizeExceedsDataset(f"size {size} exceeds dataset of {len(dataset)}")
    rng = np.random.RandomState(config.seed)
    order = rng.permutation(len(dataset))
    shuffled = [dataset[i] for i in order]
    y_true = [ex.label for ex in eval_set]
    rows: list[dict] = []
    for size in sizes:
        handle = train_classifier(shuffled[:size], config)
        preds = handle.predict_batch([ex.text for ex in eval_set])
        report = weighted_metrics(y_true=y_true, y_pred=[p.label for p in preds])
        rows.append(
            {
                "size": size,
                "weighted_f1": report.weighted_f1,
                "weighted_precision": report.weighted_precision,
                "weighted_recall": report.weighted_recall,
            }
        )
    return rows


# --- artifacts ---------------------------------------------------------------


def save_classifier(handle: ClassifierHandle, path: str | Path) -> None:
    """Persist a trained handle as a manifest + model payload directory."""
    import joblib

    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    manifest = dict(handle.manifest())
    if isinstance(handle, LightweightClassifier):
        manifest["model_file"] = "model.joblib"
        joblib.dump(
            {"vectorizer": handle._vectorizer, "model": handle._model, "config": handle.config},
            root / "model.joblib",
        )
    elif isinstance(handle, LexiconClassifier):
        manifest["model_file"] = None
    else:
        raise BackendUnavailable(f"saving not supported for backend {handle.backend_id}")
    atomic_write_text(root / "manifest.json", stable_json(manifest) + "\n")


def load_classifier(path: str | Path) -> ClassifierHandle:
    import joblib

    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise BackendUnavailable(f"no classifier manifest under {root}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    backend = manifest["backend"]
    if backend == LightweightClassifier.backend_id:
        payload = joblib.load(root / manifest["model_file"])
        return LightweightClassifier(payload["vectorizer"], payload["model"], payload["config"])
    if backend == LexiconClassifier.backend_id:
        return LexiconClassifier(decision_threshold=manifest["decision_threshold"])
    raise BackendUnavailable(f"unknown backend {backend!r} in manifest")

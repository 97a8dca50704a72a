"""119-dimensional numeric feature vectors per sentence, plus z-score
normalization fitted on a training matrix.

The feature registry is data, not code: a versioned manifest listing the
119 features in order (17 coarse part-of-speech counts, 50 fine-tag
counts, 40 dependency-relation counts, 8 entity-type counts, 3 surface
counts, and the sentence character length). Alternate registries can be
swapped in without touching this module.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Protocol, Sequence

from ._util import atomic_write_text, stable_json
from .corpus import SentenceRecord
from .errors import EmptyMatrix, RegistryMismatch
from .tagging import STOPWORDS, TokenAnnotation

EXTRACTOR_KINDS = frozenset(
    {
        "coarse_pos_count",
        "fine_tag_count",
        "dependency_relation_count",
        "entity_type_count",
        "surface_count",
        "char_length",
    }
)

STD_FLOOR = 1e-12

_DIGIT_TOKEN_RE = re.compile(r"^\d[\d.,]*$")


class Tagger(Protocol):
    version: str
    shareable: bool

    def annotate(self, text: str) -> list[TokenAnnotation]: ...


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str


@dataclass(frozen=True)
class FeatureRegistry:
    version: str
    features: tuple[FeatureSpec, ...]

    def __post_init__(self):
        if len(self.features) != 119:
            raise ValueError(f"registry must list exactly 119 features, got {len(self.features)}")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ValueError("registry feature names must be unique")
        bad = {f.kind for f in self.features} - EXTRACTOR_KINDS
        if bad:
            raise ValueError(f"unknown extractor kinds: {sorted(bad)}")
        n_len = sum(1 for f in self.features if f.kind == "char_length")
        if n_len != 1:
            raise ValueError(f"registry must contain exactly one char_length feature, got {n_len}")

    def names(self) -> list[str]:
        return [f.name for f in self.features]


@dataclass(frozen=True)
class FeatureVector:
    registry_version: str
    values: tuple[float, ...]

    def __post_init__(self):
        if any(v != v or v in (float("inf"), float("-inf")) for v in self.values):
            raise ValueError("feature values must be finite")


@dataclass(frozen=True)
class NormalizationStats:
    registry_version: str
    means: tuple[float, ...]
    stds: tuple[float, ...]  # population std, floored at STD_FLOOR

    def __post_init__(self):
        if len(self.means) != len(self.stds):
            raise ValueError("means/stds length mismatch")
        if any(s <= 0 for s in self.stds):
            raise ValueError("stds must be positive after flooring")


def load_registry(path: str | Path | None = None) -> FeatureRegistry:
    """Load a registry manifest; defaults to the packaged reg-v1."""
    if path is None:
        raw = resources.files("lori.data").joinpath("registry.json").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    doc = json.loads(raw)
    return FeatureRegistry(
        version=doc["version"],
        features=tuple(FeatureSpec(f["name"], f["kind"]) for f in doc["features"]),
    )


def extract_features(
    sentence: SentenceRecord,
    tagger: Tagger,
    registry: FeatureRegistry,
) -> FeatureVector:
    """Count annotation categories per registry entry.

    The char_length entry reads the sentence's stored character length
    rather than re-tokenizing, so it stays consistent with the corpus
    record even if the tagger normalizes text internally.
    """
    annotations = tagger.annotate(sentence.text)
    values: list[float] = []
    for spec in registry.features:
        values.append(float(_feature_value(spec, sentence, annotations)))
    return FeatureVector(registry_version=registry.version, values=tuple(values))


def _feature_value(
    spec: FeatureSpec,
    sentence: SentenceRecord,
    annotations: Sequence[TokenAnnotation],
) -> int:
    kind = spec.kind
    if kind == "char_length":
        return sentence.char_length
    if kind == "coarse_pos_count":
        target = spec.name.split(":", 1)[1]
        return sum(1 for a in annotations if a.coarse == target)
    if kind == "fine_tag_count":
        target = spec.name.split(":", 1)[1]
        return sum(1 for a in annotations if a.fine == target)
    if kind == "dependency_relation_count":
        target = spec.name.split(":", 1)[1]
        return sum(1 for a in annotations if a.dep == target)
    if kind == "entity_type_count":
        target = spec.name.split(":", 1)[1]
        return sum(1 for a in annotations if a.ent == target)
    if kind == "surface_count":
        surface = spec.name.split(":", 1)[1]
        if surface == "digit_tokens":
            return sum(1 for a in annotations if _DIGIT_TOKEN_RE.match(a.text))
        if surface == "word_tokens":
            return sum(1 for a in annotations if any(ch.isalnum() for ch in a.text))
        if surface == "stopword_tokens":
            return sum(1 for a in annotations if a.text.lower() in STOPWORDS)
        raise ValueError(f"unknown surface feature {spec.name!r}")
    raise ValueError(f"unknown extractor kind {kind!r}")


def fit_normalizer(matrix: Sequence[FeatureVector]) -> NormalizationStats:
    """Per-feature mean and population standard deviation."""
    if not matrix:
        raise EmptyMatrix("cannot fit normalization stats on an empty matrix")
    version = matrix[0].registry_version
    for vec in matrix:
        if vec.registry_version != version:
            raise RegistryMismatch(
                f"mixed registry versions in matrix: {vec.registry_version} vs {version}"
            )
    n = len(matrix)
    dim = len(matrix[0].values)
    means = [sum(vec.values[j] for vec in matrix) / n for j in range(dim)]
    stds = []
    for j in range(dim):
        var = sum((vec.values[j] - means[j]) ** 2 for vec in matrix) / n
        stds.append(max(var ** 0.5, STD_FLOOR))
    return NormalizationStats(
        registry_version=version, means=tuple(means), stds=tuple(stds)
    )


def apply_normalizer(vector: FeatureVector, stats: NormalizationStats) -> FeatureVector:
    if vector.registry_version != stats.registry_version:
        raise RegistryMismatch(
            f"vector registry {vector.registry_version} does not match "
            f"stats registry {stats.registry_version}"
        )
    if len(vector.values) != len(stats.means):
        raise RegistryMismatch("vector dimension does not match stats dimension")
    z = tuple(
        (x - m) / s for x, m, s in zip(vector.values, stats.means, stats.stds)
    )
    return FeatureVector(registry_version=vector.registry_version, values=z)


def save_stats(stats: NormalizationStats, path: str | Path) -> None:
    atomic_write_text(
        path,
        stable_json(
            {
                "registry_version": stats.registry_version,
                "means": list(stats.means),
                "stds": list(stats.stds),
            }
        )
        + "\n",
    )


def load_stats(path: str | Path) -> NormalizationStats:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return NormalizationStats(
        registry_version=doc["registry_version"],
        means=tuple(doc["means"]),
        stds=tuple(doc["stds"]),
    )

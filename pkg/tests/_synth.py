"""Seeded synthetic corpora with a known decision rule.

Positive sentences draw from leadership-flavored templates, negatives
from neutral ones, so a working classifier separates them easily and a
broken one cannot hide.
"""

from __future__ import annotations

import random

from lori.classify import TrainExample

_POSITIVE_TEMPLATES = (
    "{name} led the {noun} team through a difficult {noun2}.",
    "{name} mentored junior colleagues and coordinated the {noun}.",
    "as project lead, {name} inspired the {noun} group to deliver early",
    "{name} communicated the {noun} plan clearly to every stakeholder.",
    "{name} organized the {noun} effort and rallied the {noun2} team",
    "the committee praised how {name} guided and motivated the {noun} crew",
)

_NEGATIVE_TEMPLATES = (
    "the {noun} report was filed on {day}.",
    "{name} attended the {noun} lecture about {noun2}.",
    "the {noun} invoice listed {count} items.",
    "it rained during the {noun} conference on {day}.",
    "the {noun} dataset contains {count} rows of {noun2} numbers",
    "{name} parked near the {noun} building every {day}.",
)

_NAMES = ("alex", "jordan", "sam", "riley", "casey", "morgan", "jamie", "taylor")
_NOUNS = ("analytics", "robotics", "biology", "budget", "archive", "survey",
          "platform", "curriculum", "logistics", "research")
_DAYS = ("monday", "tuesday", "wednesday", "thursday", "friday")


def synthetic_examples(n: int, seed: int, positive_fraction: float = 0.5) -> list[TrainExample]:
    rng = random.Random(seed)
    out: list[TrainExample] = []
    for i in range(n):
        label = 1 if rng.random() < positive_fraction else 0
        template = rng.choice(_POSITIVE_TEMPLATES if label else _NEGATIVE_TEMPLATES)
        text = template.format(
            name=rng.choice(_NAMES),
            noun=rng.choice(_NOUNS),
            noun2=rng.choice(_NOUNS),
            day=rng.choice(_DAYS),
            count=rng.randint(2, 90),
        )
        out.append(TrainExample(text=text, label=label))
    return out

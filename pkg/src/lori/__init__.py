"""LORI: leadership-evidence analysis for letters of recommendation.

The package covers the full path from raw letters to reviewer-facing
reports: text preparation, linguistic features, weak-supervision label
aggregation, a trainable sentence classifier, reasoning-loop phrase
extraction with isolated verification, per-applicant report assembly,
and an HTTP service plus CLI on top.
"""

__version__ = "0.1.0"

PIPELINE_VERSION = "lori-pipeline/0.1.0"

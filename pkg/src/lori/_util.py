"""Small shared helpers: stable JSON, ndjson line records, atomic writes."""

from __future__ import annotations

import json
import os
import tempfile
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Iterator


def stable_json(obj: Any, indent: int | None = 2) -> str:
    """Serialize with sorted keys so equal objects yield equal bytes."""
    return json.dumps(obj, sort_keys=True, indent=indent, ensure_ascii=False)


def format_fraction(value: Fraction | float | int, places: int = 4) -> str:
    """Render a fraction as a fixed-decimal string (banker's rounding).

    All fractions cross the API boundary in this form so golden-file
    comparisons stay byte-stable.
    """
    if isinstance(value, Fraction):
        dec = Decimal(value.numerator) / Decimal(value.denominator)
    else:
        dec = Decimal(repr(float(value)))
    quantum = Decimal(1).scaleb(-places)
    return str(dec.quantize(quantum, rounding=ROUND_HALF_EVEN))


def write_ndjson(path: str | Path, records: Iterable[dict]) -> int:
    """Write one JSON object per line; returns the record count."""
    n = 0
    with atomic_open(path) as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True, ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n


def read_ndjson(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (1-based line number, record) pairs, skipping blank lines."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if line:
                yield lineno, json.loads(line)


class atomic_open:
    """Write-temp-then-rename file writes; readers never see a torn file."""

    def __init__(self, path: str | Path, mode: str = "w"):
        self.path = Path(path)
        self.mode = mode

    def __enter__(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, self._tmp = tempfile.mkstemp(dir=self.path.parent, prefix=".tmp-")
        self._fh = os.fdopen(fd, self.mode, encoding=None if "b" in self.mode else "utf-8")
        return self._fh

    def __exit__(self, exc_type, exc, tb):
        self._fh.close()
        if exc_type is None:
            os.replace(self._tmp, self.path)
        else:
            os.unlink(self._tmp)
        return False


def atomic_write_text(path: str | Path, text: str) -> None:
    with atomic_open(path) as fh:
        fh.write(text)


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    with atomic_open(path, "wb") as fh:
        fh.write(data)

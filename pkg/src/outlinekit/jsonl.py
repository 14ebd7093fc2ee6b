"""JSON Lines I/O with skip-and-log handling for noisy snapshots."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Iterable, Iterator

logger = logging.getLogger(__name__)


def read_jsonl(path: str | Path) -> Iterator[dict]:
    """Yield every well-formed object; raise on malformed lines."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise ValueError(f"{path}:{lineno}: expected an object")
            yield obj


def read_jsonl_lenient(path: str | Path) -> tuple[list[dict], int]:
    """Read all objects, skipping and logging malformed lines.

    Returns the parsed objects and the number of skipped lines. Large
    snapshots contain noise; one bad line must not abort a batch run.
    """
    out: list[dict] = []
    skipped = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                logger.warning("%s:%d: skipping malformed line (%s)", path, lineno, exc.msg)
                skipped += 1
                continue
            if not isinstance(obj, dict):
                logger.warning("%s:%d: skipping non-object line", path, lineno)
                skipped += 1
                continue
            out.append(obj)
    return out, skipped


def write_jsonl(path: str | Path, objects: Iterable[dict]) -> int:
    """Write objects one per line; returns the number written."""
    count = 0
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objects:
            fh.write(json.dumps(obj, ensure_ascii=False))
            fh.write("\n")
            count += 1
    return count

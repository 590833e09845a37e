"""JSON-lines/CSV plumbing, atomic writes, order-preserving worker pools."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence


@dataclass
class RecordError:
    line: int
    id: object
    message: str

    def __str__(self):
        where = f"line {self.line}" if self.line else "record"
        ident = f" (id={self.id!r})" if self.id is not None else ""
        return f"{where}{ident}: {self.message}"


def iter_jsonl(path) -> Iterator[tuple[int, object, str | None]]:
    """Yield ``(line_number, record, error)``; blank lines are skipped.

    Malformed lines yield ``record=None`` and a message instead of raising so
    callers can report them and carry on.
    """
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                yield lineno, None, f"malformed JSON: {exc.msg}"
                continue
            if not isinstance(rec, dict):
                yield lineno, None, "record is not a JSON object"
                continue
            yield lineno, rec, None


def read_jsonl(path) -> tuple[list[tuple[int, dict]], list[RecordError]]:
    good, bad = [], []
    for lineno, rec, err in iter_jsonl(path):
        if err:
            bad.append(RecordError(lineno, None, err))
        else:
            good.append((lineno, rec))
    return good, bad


def dumps_jsonl(records: Iterable[dict]) -> str:
    return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)


def dumps_csv(rows: Sequence[dict], fieldnames: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(fieldnames), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(v) for k, v in row.items()})
    return buf.getvalue()


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [row for row in csv.DictReader(line for line in fh if not line.startswith("#"))]


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def parallel_map(fn: Callable, items: Sequence, jobs: int = 1) -> list:
    """``[fn(x) for x in items]`` spread over ``jobs`` processes, input order kept."""
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    jobs = min(jobs, len(items))
    chunksize = max(1, len(items) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))

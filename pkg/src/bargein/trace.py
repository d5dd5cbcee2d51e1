"""Session traces: the ordered, timestamped record of everything a session did.

Traces are the unit of golden-test comparison, so serialization is canonical:
sorted keys, compact separators, one JSON object per line. Identical sessions
produce byte-identical ND-JSON.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator


@dataclass(frozen=True)
class TraceEntry:
    t: float
    kind: str
    payload: dict

    def to_json(self) -> str:
        return json.dumps(
            {"t": self.t, "kind": self.kind, "payload": self.payload},
            sort_keys=True,
            separators=(",", ":"),
        )


class SessionTrace:
    """Append-only, time-ordered trace."""

    def __init__(self) -> None:
        self._entries: list[TraceEntry] = []

    def append(self, t: float, kind: str, **payload) -> TraceEntry:
        if self._entries and t < self._entries[-1].t:
            raise ValueError(
                f"trace entry at {t} precedes last entry at {self._entries[-1].t}"
            )
        entry = TraceEntry(t, kind, payload)
        self._entries.append(entry)
        return entry

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[TraceEntry]:
        return iter(self._entries)

    def __getitem__(self, index) -> TraceEntry:
        return self._entries[index]

    @property
    def entries(self) -> list[TraceEntry]:
        return list(self._entries)

    def of_kind(self, kind: str) -> list[TraceEntry]:
        return [e for e in self._entries if e.kind == kind]

    def to_ndjson(self) -> str:
        return "".join(e.to_json() + "\n" for e in self._entries)

    def write_ndjson(self, path: str | Path) -> None:
        Path(path).write_text(self.to_ndjson(), encoding="utf-8")

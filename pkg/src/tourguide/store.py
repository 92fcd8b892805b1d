"""Session persistence: JSON snapshots plus append-only JSONL turn logs.

The default store is file-backed (one snapshot file and one log file per
session under a root directory); anything implementing the same four
methods can replace it.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Protocol


class SessionStore(Protocol):
    def save_snapshot(self, snapshot: dict) -> None: ...

    def load_snapshot(self, session_id: str) -> dict | None: ...

    def append_turn(self, session_id: str, record: dict) -> None: ...

    def read_turns(self, session_id: str) -> list[dict]: ...


class FileSessionStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "sessions").mkdir(parents=True, exist_ok=True)
        (self.root / "turns").mkdir(parents=True, exist_ok=True)

    def _snapshot_path(self, session_id: str) -> Path:
        return self.root / "sessions" / f"{session_id}.json"

    def _log_path(self, session_id: str) -> Path:
        return self.root / "turns" / f"{session_id}.jsonl"

    def save_snapshot(self, snapshot: dict) -> None:
        path = self._snapshot_path(snapshot["session_id"])
        path.write_text(
            json.dumps(snapshot, ensure_ascii=False, sort_keys=True, indent=2),
            encoding="utf-8")

    def load_snapshot(self, session_id: str) -> dict | None:
        path = self._snapshot_path(session_id)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def append_turn(self, session_id: str, record: dict) -> None:
        with open(self._log_path(session_id), "a", encoding="utf-8") as f:
            f.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")

    def read_turns(self, session_id: str) -> list[dict]:
        path = self._log_path(session_id)
        if not path.exists():
            return []
        return [
            json.loads(line)
            for line in path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]


class MemorySessionStore:
    """Dict-backed store for tests and throwaway servers."""

    def __init__(self):
        self.snapshots: dict[str, dict] = {}
        self.turns: dict[str, list[dict]] = {}

    def save_snapshot(self, snapshot: dict) -> None:
        self.snapshots[snapshot["session_id"]] = json.loads(
            json.dumps(snapshot, ensure_ascii=False))

    def load_snapshot(self, session_id: str) -> dict | None:
        return self.snapshots.get(session_id)

    def append_turn(self, session_id: str, record: dict) -> None:
        self.turns.setdefault(session_id, []).append(
            json.loads(json.dumps(record, ensure_ascii=False)))

    def read_turns(self, session_id: str) -> list[dict]:
        return list(self.turns.get(session_id, []))

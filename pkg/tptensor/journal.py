from __future__ import annotations

import sqlite3
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any


SCHEMA = """
PRAGMA journal_mode=WAL;

CREATE TABLE IF NOT EXISTS runs (
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  ts INTEGER NOT NULL,
  subcommand TEXT NOT NULL,
  source TEXT NOT NULL, -- sym2|file|none
  m INTEGER,
  a REAL,
  case_label TEXT,
  exit_code INTEGER NOT NULL
);

CREATE TABLE IF NOT EXISTS logs (
  id INTEGER PRIMARY KEY AUTOINCREMENT,
  ts INTEGER NOT NULL,
  level TEXT NOT NULL,
  event TEXT NOT NULL,
  detail TEXT
);
"""


@dataclass
class Journal:
    path: Path

    def connect(self) -> sqlite3.Connection:
        conn = sqlite3.connect(self.path, check_same_thread=False)
        conn.row_factory = sqlite3.Row
        return conn

    def init(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.connect() as conn:
            conn.executescript(SCHEMA)
            conn.commit()

    def log(self, level: str, event: str, detail: str | None = None) -> None:
        with self.connect() as conn:
            conn.execute(
                "INSERT INTO logs(ts, level, event, detail) VALUES(?,?,?,?)",
                (int(time.time()), level, event, detail),
            )
            conn.commit()

    def record_run(
        self,
        subcommand: str,
        source: str,
        exit_code: int,
        m: int | None = None,
        a: float | None = None,
        case_label: str | None = None,
    ) -> None:
        with self.connect() as conn:
            conn.execute(
                """
                INSERT INTO runs(ts, subcommand, source, m, a, case_label, exit_code)
                VALUES(?,?,?,?,?,?,?)
                """,
                (int(time.time()), subcommand, source, m, a, case_label, exit_code),
            )
            conn.commit()

    def stats(self) -> dict[str, Any]:
        with self.connect() as conn:
            runs = conn.execute("SELECT COUNT(*) AS c FROM runs").fetchone()["c"]
            failures = conn.execute("SELECT COUNT(*) AS c FROM runs WHERE exit_code<>0").fetchone()["c"]
            by_cmd = conn.execute(
                "SELECT subcommand, COUNT(*) AS c FROM runs GROUP BY subcommand ORDER BY subcommand"
            ).fetchall()
            by_case = conn.execute(
                """
                SELECT case_label, COUNT(*) AS c FROM runs
                WHERE case_label IS NOT NULL GROUP BY case_label ORDER BY case_label
                """
            ).fetchall()
            return {
                "runs": runs,
                "failures": failures,
                "by_subcommand": {r["subcommand"]: r["c"] for r in by_cmd},
                "by_case": {r["case_label"]: r["c"] for r in by_case},
            }

    def recent_logs(self, limit: int = 200) -> list[dict[str, Any]]:
        with self.connect() as conn:
            rows = conn.execute("SELECT * FROM logs ORDER BY ts DESC, id DESC LIMIT ?", (limit,)).fetchall()
            return [dict(r) for r in rows]


class NullJournal:
    """Stands in for Journal when recording is switched off."""

    def init(self) -> None:
        pass

    def log(self, level: str, event: str, detail: str | None = None) -> None:
        pass

    def record_run(self, subcommand: str, source: str, exit_code: int, **_: Any) -> None:
        pass


def open_journal(enabled: bool, path: Path) -> Journal | NullJournal:
    if not enabled:
        return NullJournal()
    j = Journal(path=path)
    j.init()
    return j

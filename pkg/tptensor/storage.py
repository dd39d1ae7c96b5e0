from __future__ import annotations

import re
from pathlib import Path

from tptensor.config import settings


def data_dir() -> Path:
    return Path(settings.DATA_DIR)


def journal_path() -> Path:
    return data_dir() / "journal.db"


def traces_dir() -> Path:
    return data_dir() / "traces"


def safe_filename(name: str) -> str:
    name = name.strip().replace("\\", "_").replace("/", "_")
    name = re.sub(r"[^a-zA-Z0-9._=-]+", "_", name)
    return name[:120] or "trace"


def default_trace_name(m: int, a: float, seed: int) -> str:
    return safe_filename(f"trace_m={m}_a={a!r}_seed={seed}.txt")


def ensure_dirs() -> None:
    data_dir().mkdir(parents=True, exist_ok=True)
    traces_dir().mkdir(parents=True, exist_ok=True)

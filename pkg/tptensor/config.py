from __future__ import annotations

import os

try:
    # Allows local runs via a .env file. Environment variables still win.
    from dotenv import load_dotenv

    load_dotenv(override=False)
except Exception:
    pass


def _env(name: str, default: str | None = None) -> str | None:
    v = os.getenv(name)
    if v is None or v == "":
        return default
    return v


def _env_int(name: str, default: int) -> int:
    try:
        return int(_env(name, str(default)) or default)
    except Exception:
        return default


def _env_float(name: str, default: float) -> float:
    try:
        return float(_env(name, repr(default)) or default)
    except Exception:
        return default


class Settings:
    def __init__(self) -> None:
        self.TPT_ENV: str = _env("TPT_ENV", "development") or "development"

        self.DATA_DIR: str = _env("TPT_DATA_DIR", "data") or "data"
        raw = (_env("TPT_JOURNAL", "0") or "0").strip().lower()
        self.JOURNAL: bool = raw in ("1", "true", "yes", "on")

        # Small pool in production containers.
        default_workers = 1 if self.TPT_ENV == "production" else 2
        self.MAX_WORKERS: int = max(1, _env_int("TPT_MAX_WORKERS", default_workers))

        self.GRID_POINTS: int = _env_int("TPT_GRID_POINTS", 100001)
        if self.GRID_POINTS < 1001:
            self.GRID_POINTS = 1001
        self.TOL: float = _env_float("TPT_TOL", 1e-10)
        if not self.TOL > 0:
            self.TOL = 1e-10
        self.MAX_ITER: int = max(1, _env_int("TPT_MAX_ITER", 10000))


settings = Settings()

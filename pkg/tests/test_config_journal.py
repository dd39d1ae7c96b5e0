from __future__ import annotations

import pytest

from tptensor.config import Settings
from tptensor.journal import Journal, NullJournal, open_journal
from tptensor.storage import default_trace_name, ensure_dirs, journal_path, safe_filename, traces_dir

ENV_KEYS = ("TPT_ENV", "TPT_DATA_DIR", "TPT_JOURNAL", "TPT_MAX_WORKERS", "TPT_GRID_POINTS", "TPT_TOL", "TPT_MAX_ITER")


@pytest.fixture
def clean_env(monkeypatch):
    for key in ENV_KEYS:
        monkeypatch.delenv(key, raising=False)
    return monkeypatch


def test_settings_defaults(clean_env):
    s = Settings()
    assert s.TPT_ENV == "development"
    assert s.DATA_DIR == "data"
    assert s.JOURNAL is False
    assert s.MAX_WORKERS == 2
    assert s.GRID_POINTS == 100001
    assert s.TOL == 1e-10
    assert s.MAX_ITER == 10000


def test_settings_production_pool(clean_env):
    clean_env.setenv("TPT_ENV", "production")
    assert Settings().MAX_WORKERS == 1
    clean_env.setenv("TPT_MAX_WORKERS", "8")
    assert Settings().MAX_WORKERS == 8


@pytest.mark.parametrize("raw,expected", [("abc", 2), ("0", 1), ("-3", 1), ("", 2)])
def test_settings_bad_worker_count(clean_env, raw, expected):
    clean_env.setenv("TPT_MAX_WORKERS", raw)
    assert Settings().MAX_WORKERS == expected


def test_settings_clamps_numerics(clean_env):
    clean_env.setenv("TPT_GRID_POINTS", "10")
    clean_env.setenv("TPT_TOL", "-1")
    clean_env.setenv("TPT_MAX_ITER", "0")
    s = Settings()
    assert s.GRID_POINTS == 1001
    assert s.TOL == 1e-10
    assert s.MAX_ITER == 1


@pytest.mark.parametrize("raw", ["1", "true", "YES", " on "])
def test_settings_journal_switch(clean_env, raw):
    clean_env.setenv("TPT_JOURNAL", raw)
    assert Settings().JOURNAL is True


def test_journal_roundtrip(tmp_path):
    j = Journal(path=tmp_path / "nested" / "journal.db")
    j.init()
    j.log("info", "cli.start", "classify")
    j.log("error", "cli.error", "classify: bad a")
    j.record_run("classify", "sym2", 0, m=3, a=0.5, case_label="EqualAB")
    j.record_run("classify", "sym2", 2)
    j.record_run("sweep", "none", 0)

    stats = j.stats()
    assert stats["runs"] == 3
    assert stats["failures"] == 1
    assert stats["by_subcommand"] == {"classify": 2, "sweep": 1}
    assert stats["by_case"] == {"EqualAB": 1}

    logs = j.recent_logs(10)
    assert [row["event"] for row in logs] == ["cli.error", "cli.start"]
    assert logs[0]["detail"] == "classify: bad a"
    assert len(j.recent_logs(1)) == 1


def test_journal_init_is_idempotent(tmp_path):
    j = Journal(path=tmp_path / "journal.db")
    j.init()
    j.record_run("validate", "file", 1)
    j.init()
    assert j.stats()["runs"] == 1


def test_null_journal_writes_nothing(tmp_path):
    path = tmp_path / "journal.db"
    j = open_journal(False, path)
    assert isinstance(j, NullJournal)
    j.init()
    j.log("info", "cli.start")
    j.record_run("classify", "sym2", 0, m=3)
    assert not path.exists()
    assert isinstance(open_journal(True, path), Journal)
    assert path.exists()


def test_storage_paths(isolated_settings, tmp_path):
    assert journal_path() == tmp_path / "data" / "journal.db"
    ensure_dirs()
    assert traces_dir().is_dir()


def test_safe_filename():
    assert safe_filename("a/b c?.txt") == "a_b_c_.txt"
    assert safe_filename("   ") == "trace"
    assert len(safe_filename("x" * 500)) == 120
    assert default_trace_name(4, 0.5, 7) == "trace_m=4_a=0.5_seed=7.txt"

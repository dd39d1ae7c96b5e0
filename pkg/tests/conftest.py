from __future__ import annotations

import pytest

from tptensor.config import settings


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "DATA_DIR", str(tmp_path / "data"))
    monkeypatch.setattr(settings, "JOURNAL", False)
    monkeypatch.setattr(settings, "MAX_WORKERS", 2)
    return settings


def tpt1_text(order: int, dim: int, values: list[float]) -> str:
    body = "\n".join(repr(float(v)) for v in values)
    return f"TPT1\norder {order}\ndim {dim}\nentries\n{body}\nend\n"

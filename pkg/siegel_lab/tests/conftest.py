import math

import pytest
from sympy import factorint

from siegel_lab.config import get_settings
from siegel_lab.quad_char import QuadChar


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Fresh settings per test, no .env pickup, reports under tmp_path."""
    for key in list(__import__("os").environ):
        if key.upper().startswith("SIEGEL_LAB_"):
            monkeypatch.delenv(key, raising=False)
    monkeypatch.chdir(tmp_path)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def chi4():
    return QuadChar(-4)


@pytest.fixture
def chi163():
    return QuadChar(-163)


def oracle(n: int) -> dict:
    """Base functions of n by trial factorisation."""
    f = factorint(n)
    return {
        "liouville": -1 if sum(f.values()) % 2 else 1,
        "mangoldt": math.log(next(iter(f))) if len(f) == 1 else 0.0,
        "mu": 0 if any(e > 1 for e in f.values()) else (-1) ** len(f),
        "tau": math.prod(e + 1 for e in f.values()),
        "spf": min(f) if f else 1,
    }

"""Tests for the shared application context."""

from pathlib import Path

import pytest

from app import AppContext
from exceptions import ContractError
from models import PolyhedronKind


def test_defaults_and_overrides():
    app = AppContext()
    assert (app.workers, app.seed) == (1, 0)
    assert app.overrides == {}
    app = AppContext(workers=3, seed=None)
    assert app.overrides == {"workers": 3}


def test_invalid_workers():
    with pytest.raises(ContractError):
        AppContext(workers=0)


def test_protocols_are_cached():
    app = AppContext()
    first = app.protocol(PolyhedronKind.CUBE, 1)
    assert app.protocol(PolyhedronKind.CUBE, 1) is first
    assert app.protocol(PolyhedronKind.CUBE, 2).m == 36


def test_output_path(tmp_path):
    app = AppContext(output_dir=tmp_path)
    assert app.output_path(None, "x.csv") == tmp_path / "x.csv"
    assert app.output_path(Path("given.csv"), "x.csv") == Path("given.csv")

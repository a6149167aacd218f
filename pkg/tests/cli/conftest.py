"""Fixtures for the command-line tests."""

import logging

import pytest


@pytest.fixture(autouse=True)
def restore_root_logger(monkeypatch):
    """Commands reconfigure the root logger; put it back afterwards."""
    monkeypatch.delenv("DEBUG", raising=False)
    monkeypatch.delenv("DPU_SIM_MAX_WORKERS", raising=False)
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in list(root.handlers):
        root.removeHandler(handler)
    for handler in handlers:
        root.addHandler(handler)
    root.setLevel(level)

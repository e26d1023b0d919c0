"""Shared fixtures: preset runs are expensive, so each (preset, dt) is run once per session."""

from functools import lru_cache

import pytest

from majorana_bell.presets import preset
from majorana_bell.runner import run


@lru_cache(maxsize=None)
def preset_run(name: str, dt: float | None = None):
    return run(preset(name), dt=dt)


@pytest.fixture(scope="session")
def run_preset():
    return preset_run

"""
Shared fixtures
"""

import pytest

from src.dynamics.lattice import InitialCondition


@pytest.fixture
def shock_ic():
    return InitialCondition.shock(0.25, 0.75)


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    """Output directory with the env override cleared"""
    monkeypatch.delenv('SHOCK_TASEP_OUTPUT_DIR', raising=False)
    return tmp_path / 'output'

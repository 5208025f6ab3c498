import sys
from pathlib import Path

import pytest

# test helpers (reference_values, artifact_store) live next to the tests
sys.path.insert(0, str(Path(__file__).resolve().parent))

import artifact_store  # noqa: E402


@pytest.fixture(scope="session")
def scan_rows():
    """The omega-15 charge scan, loaded from the artifact cache."""
    return artifact_store.ensure_scan()

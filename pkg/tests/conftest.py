import sys
from pathlib import Path

import pytest

from anneal_law import LawParams

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def fig2_params() -> LawParams:
    """Reference parameter tuple used across the studies."""
    return LawParams(L0=2.628, A=0.429, C=0.411, alpha=0.550)

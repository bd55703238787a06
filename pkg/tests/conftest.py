import pytest

from graphrd import SbmParams


@pytest.fixture
def ref_sbm():
    """100-node, 3-community reference instance used across the suite."""
    return SbmParams(
        n=100,
        p=[0.4, 0.3, 0.3],
        W=[[0.5, 0.2, 0.1], [0.2, 0.5, 0.1], [0.1, 0.1, 0.4]],
    )

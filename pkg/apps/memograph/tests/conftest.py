"""
This module contains the fixtures for the tests.
"""
from unittest.mock import MagicMock

import pytest

from memograph.repository import Repository, RepositoryView
from memograph.similarity import SCORE_CACHE, SimilarityConfig
from memograph.tests.values import SPEC, UNIT_COEFFS, chain, diamond


@pytest.fixture(autouse=True)
def clear_score_cache():
    """
    Start every test with an empty similarity cache.
    """
    SCORE_CACHE.clear()
    yield
    SCORE_CACHE.clear()


@pytest.fixture(scope="function")
def store(tmp_path) -> Repository:
    """
    Fresh store in a temporary directory.
    :return: Repository
    """
    return Repository.init(tmp_path / "store", SPEC)


@pytest.fixture(scope="function")
def sample_chain():
    """
    Three step chain with distinct labels.
    """
    return chain(["load sales table", "compute monthly totals", "plot trend"])


@pytest.fixture(scope="function")
def sample_diamond():
    """
    Diamond a -> (b, c) -> d with increasing latencies.
    """
    return diamond()


@pytest.fixture(scope="function")
def similarity_cfg() -> SimilarityConfig:
    return SimilarityConfig()


@pytest.fixture(scope="function")
def unit_coeffs():
    """
    One unit of cost per executed node and nothing else.
    """
    return UNIT_COEFFS


@pytest.fixture(scope="function")
def mock_repo_view():
    """
    Mock RepositoryView with no entries.
    """
    view = MagicMock(spec=RepositoryView)
    view.query.return_value = []
    yield view

import pytest

from urnflow.corpus import corpus_names, load_corpus_graph


@pytest.fixture(scope="session")
def corpus():
    return {name: load_corpus_graph(name) for name in corpus_names()}


@pytest.fixture(scope="session")
def k3(corpus):
    return corpus["k3"]


@pytest.fixture(scope="session")
def c4(corpus):
    return corpus["c4"]


@pytest.fixture(scope="session")
def k2(corpus):
    return corpus["k2"]


@pytest.fixture(scope="session")
def p3(corpus):
    return corpus["p3"]

import itertools
import random

import pytest

from photonweave.graphs import Graph


def random_graph(rnd: random.Random, n: int) -> Graph:
    labels = list(range(1, n + 1))
    edges = [e for e in itertools.combinations(labels, 2) if rnd.random() < 0.5]
    return Graph(labels, edges)


@pytest.fixture
def rnd() -> random.Random:
    return random.Random(20240901)

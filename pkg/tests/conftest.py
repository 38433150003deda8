import random

import pytest

from seqalloc import make_instance


@pytest.fixture
def remark1():
    """Two agents, four items; sincere picking under 1,2,2,1 is not Pareto efficient."""
    return make_instance(2, [[5, 4, 2, 0], [8, 2, 1, 0]], items=["a", "b", "c", "d"])


@pytest.fixture
def example1():
    """Three agents with Borda utilities from orders bac / abc / acb."""
    return make_instance(3, [[1, 2, 0], [2, 1, 0], [2, 0, 1]], items=["a", "b", "c"])


def random_instance(rng: random.Random, n: int, m: int, umax: int):
    utilities = [[rng.randint(0, umax) for _ in range(m)] for _ in range(n)]
    return make_instance(n, utilities)


def random_identical_ranking_instance(rng: random.Random, m: int, umax: int):
    """Two agents whose derived rankings coincide (shared tie-break order)."""
    order = list(range(m))
    rng.shuffle(order)
    utilities = []
    for _ in range(2):
        values = sorted((rng.randint(0, umax) for _ in range(m)), reverse=True)
        row = [0] * m
        for pos, item in enumerate(order):
            row[item] = values[pos]
        utilities.append(row)
    return make_instance(2, utilities, tie_break=[order, order])

import functools
import math
from fractions import Fraction

import numpy as np
import pytest

from betheprep import ModelParams, enumerate_solutions, solve_bethe
from betheprep.pipeline import evaluate

DELTA = -0.5
REF_K = (1.14676529, 3.56562369)
REF_I = (Fraction(-3, 2), Fraction(1, 2))


@functools.lru_cache(maxsize=None)
def solutions(L, M, j_z=DELTA):
    return tuple(enumerate_solutions(ModelParams(L, M, 1.0, j_z)))


@functools.lru_cache(maxsize=None)
def outcomes(L, M, j_z=DELTA, rounds=0):
    return tuple(evaluate(s, rounds) for s in solutions(L, M, j_z))


def kmod(k):
    return np.sort(np.mod(np.asarray(k, dtype=float), 2 * math.pi))


@pytest.fixture(scope="session")
def ref_state():
    return solve_bethe(ModelParams(4, 2, 1.0, DELTA), REF_I)

import numpy as np
import scipy.sparse as sp
import sympy
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from l2lab.linalg import PRIMES, bareiss_rank, exact_rank, rank_mod_p

matrices = st.tuples(st.integers(1, 7), st.integers(1, 7)).flatmap(
    lambda s: arrays(np.int64, s, elements=st.integers(-3, 3)))


@given(matrices)
def test_ranks_agree_with_sympy(A):
    expected = sympy.Matrix(A.tolist()).rank()
    assert bareiss_rank(A) == expected
    assert exact_rank(sp.csr_matrix(A)) == expected
    assert rank_mod_p(A, PRIMES[0]) == expected


def test_rank_mod_small_prime_can_drop():
    A = np.array([[2, 0], [0, 1]])
    assert rank_mod_p(A, 2) == 1
    assert exact_rank(A) == 2


def test_empty_and_zero():
    assert exact_rank(sp.csr_matrix((0, 5), dtype=np.int64)) == 0
    assert exact_rank(sp.csr_matrix((3, 3), dtype=np.int64)) == 0


def test_entry_divisible_by_first_prime():
    # the pivot vanishes mod PRIMES[0]; the second prime disagrees and Bareiss decides
    A = np.array([[PRIMES[0], 0], [0, 1]], dtype=np.int64)
    assert rank_mod_p(A, PRIMES[0]) == 1
    assert exact_rank(A) == 2

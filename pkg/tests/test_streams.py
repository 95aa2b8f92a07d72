from __future__ import annotations

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from jackustat.streams import keyed_uniform, replicate_seed, tag, tuple_rng


@given(st.integers(0, 2**63), st.lists(st.tuples(st.integers(0, 1000), st.integers(0, 1000)), min_size=1, max_size=30))
def test_keyed_uniform_is_a_pure_function_of_each_row(seed, rows):
    arr = np.array(rows)
    full = keyed_uniform(seed, arr)
    assert np.all((full >= 0) & (full < 1))
    perm = np.arange(len(rows))[::-1]
    np.testing.assert_array_equal(keyed_uniform(seed, arr[perm]), full[perm])
    np.testing.assert_array_equal(keyed_uniform(seed, arr[:1]), full[:1])


def test_keyed_uniform_looks_uniform():
    tuples = np.array([(i, j) for i in range(200) for j in range(i + 1, 200)])
    u = keyed_uniform(3, tuples)
    assert abs(u.mean() - 0.5) < 4 * np.sqrt(1 / 12 / len(u))
    assert abs(np.mean(u < 0.1) - 0.1) < 4 * np.sqrt(0.09 / len(u))


def test_different_seeds_give_different_keys():
    t = np.array([(1, 2), (3, 4)])
    assert not np.array_equal(keyed_uniform(1, t), keyed_uniform(2, t))


def test_tuple_rng_and_replicate_seed_are_deterministic():
    assert tuple_rng(5, (1, 2)).random() == tuple_rng(5, (1, 2)).random()
    assert tuple_rng(5, (1, 2)).random() != tuple_rng(5, (2, 1)).random()
    a = np.random.default_rng(replicate_seed(9, tag("ratio"), 100, 3)).random()
    b = np.random.default_rng(replicate_seed(9, tag("ratio"), 100, 3)).random()
    assert a == b
    assert tag("ratio") != tag("truth")

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from woselm_track import elm, oselm


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def problem(seed, n=120, d=8, L=15):
    rng = np.random.default_rng(seed)
    layer = elm.init_hidden(seed, d, L)
    H = elm.hidden_map(layer, rng.normal(size=(n, d)))
    T = elm.encode_labels(rng.integers(0, 2, n))
    return H, T


def test_init_identity_design():
    T0 = np.random.default_rng(0).normal(size=(5, 2))
    st_ = oselm.oselm_init(np.eye(5), T0)
    np.testing.assert_allclose(st_.G, np.eye(5))
    np.testing.assert_allclose(st_.beta, T0)
    assert st_.n_seen == 5


def test_init_matches_least_squares():
    rng = np.random.default_rng(1)
    H, T = rng.random((40, 10)), rng.normal(size=(40, 2))
    st_ = oselm.oselm_init(H, T)
    assert rel(st_.beta, np.linalg.lstsq(H, T, rcond=None)[0]) < 1e-10


def test_rank_deficient_init():
    H = np.random.default_rng(2).random((6, 10))
    with pytest.raises(oselm.SingularGramError):
        oselm.oselm_init(H, np.ones((6, 2)))
    st_ = oselm.oselm_init(H, np.ones((6, 2)), ridge=1e-6)
    assert np.all(np.isfinite(st_.beta))


def test_zero_innovation_keeps_beta():
    H, T = problem(3)
    st_ = oselm.oselm_init(H[:60], T[:60])
    new = oselm.oselm_update(st_, H[60:70], H[60:70] @ st_.beta)
    np.testing.assert_allclose(new.beta, st_.beta, rtol=1e-10, atol=1e-12)


def test_single_update_matches_batch():
    H, T = problem(4)
    st_ = oselm.oselm_update(oselm.oselm_init(H[:50], T[:50]), H[50:], T[50:])
    assert rel(st_.beta, np.linalg.lstsq(H, T, rcond=None)[0]) < 1e-8
    assert st_.n_seen == len(H)


def test_ten_single_updates_equal_one_chunk():
    H, T = problem(5, n=60)
    base = oselm.oselm_init(H[:50], T[:50])
    seq = base
    for i in range(50, 60):
        seq = oselm.oselm_update(seq, H[i], T[i])
    chunk = oselm.oselm_update(base, H[50:], T[50:])
    assert rel(seq.beta, chunk.beta) < 1e-8
    assert rel(seq.beta, np.linalg.lstsq(H, T, rcond=None)[0]) < 1e-8


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.lists(st.integers(1, 25), min_size=1, max_size=10))
def test_chunking_invariance(seed, sizes):
    H, T = problem(seed % 10_000, n=30 + sum(sizes))
    st_ = oselm.oselm_init(H[:30], T[:30])
    lo = 30
    for s in sizes:
        st_ = oselm.oselm_update(st_, H[lo:lo + s], T[lo:lo + s])
        assert np.max(np.abs(st_.G - st_.G.T)) <= 1e-10 * np.max(np.abs(st_.G))
        lo += s
    assert rel(st_.beta, np.linalg.lstsq(H, T, rcond=None)[0]) < 1e-8


def test_update_dimension_errors():
    H, T = problem(6)
    st_ = oselm.oselm_init(H[:50], T[:50])
    with pytest.raises(ValueError):
        oselm.oselm_update(st_, H[50:60, :5], T[50:60])
    with pytest.raises(ValueError):
        oselm.oselm_update(st_, H[50:60], T[50:55])


def test_non_finite_chunk_rejected():
    H, T = problem(7)
    st_ = oselm.oselm_init(H[:50], T[:50])
    bad = H[50:52].copy()
    bad[0, 0] = np.inf
    with pytest.raises(ValueError):
        oselm.oselm_update(st_, bad, T[50:52])

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmvca.classify import accuracy, fit_centroids, predict
from cmvca.cmvda import (
    cmvda_embed_test,
    cmvda_embed_train,
    cmvda_r_basis,
    indicator_basis,
    whiten,
    whitened_basis,
)
from cmvca.components import class_indicators, score_components
from cmvca.dataio import Dataset
from cmvca.kernels import KernelSpec, cross_gram, gram, sigma_heuristic
from cmvca.spectral import decompose, from_eigenpairs

from conftest import random_labeled


def _full_rank(seed, N=24, C=3, D=8):
    rng = np.random.default_rng(seed)
    X, labels = random_labeled(rng, N, C, D, shift=3.0)
    spec = KernelSpec.gaussian(0.5 * sigma_heuristic(X))
    m = decompose(gram(X, spec))
    assert m.rank == N
    return X, labels, spec, m


def test_indicator_basis_small():
    ind = class_indicators([0, 0, 0, 1, 1])
    b = indicator_basis(ind)
    assert b.n_vectors == 5 and b.n_leading == 2
    # smaller class first
    assert b.leading_classes == (1, 0)
    np.testing.assert_array_equal(b.vectors[:, 0], [0, 0, 0, 1 / np.sqrt(2), 1 / np.sqrt(2)])
    np.testing.assert_array_equal(b.vectors[:, 1], [1 / np.sqrt(3)] * 3 + [0, 0])
    np.testing.assert_allclose(b.vectors.T @ b.vectors, np.eye(5), atol=1e-14)


def test_indicator_basis_ties_by_class_id():
    b = indicator_basis(class_indicators([1, 1, 0, 0, 2, 2, 2]))
    assert b.leading_classes == (0, 1, 2)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=1, max_size=5), st.integers(0, 1000))
def test_indicator_basis_structure(sizes, seed):
    labels = np.repeat(np.arange(len(sizes)), sizes)
    labels = np.random.default_rng(seed).permutation(labels)
    ind = class_indicators(labels)
    b = indicator_basis(ind)
    N, C = labels.size, len(sizes)
    assert b.n_vectors == N
    np.testing.assert_allclose(b.vectors.T @ b.vectors, np.eye(N), atol=1e-12)
    # completion axes have no component along any class indicator
    np.testing.assert_allclose(ind.E.T @ b.vectors[:, C:], 0.0, atol=1e-12)
    # and each lives inside a single class block
    for v in b.vectors[:, C:].T:
        assert np.unique(labels[np.abs(v) > 1e-12]).size == 1


def test_closed_form_embedding():
    _, labels, _, m = _full_rank(0)
    wm = whiten(m)
    ind = class_indicators(labels)
    Y = cmvda_embed_train(Dataset(np.zeros((labels.size, 1)), labels), 3, whitened=wm)
    b = indicator_basis(ind)
    for row, c in enumerate(b.leading_classes):
        expect = np.where(labels == c, 1.0 / np.sqrt(ind.counts[c]), 0.0)
        np.testing.assert_array_equal(Y[row], expect)
    cm = fit_centroids(Y, labels)
    assert accuracy(predict(cm, Y), labels) == 1.0


def test_whitened_gram_is_identity_when_full_rank():
    _, _, _, m = _full_rank(1)
    np.testing.assert_allclose(whiten(m).projector, np.eye(m.n_samples), atol=1e-10)


@pytest.mark.parametrize("seed", range(3))
def test_test_embedding_consistent_with_training(seed):
    X, labels, spec, m = _full_rank(seed)
    wm = whiten(m)
    b = indicator_basis(class_indicators(labels))
    Ytr = cmvda_embed_train(labels, 6, whitened=wm)
    Yte = cmvda_embed_test(wm, b, cross_gram(X, X, spec), 6)
    np.testing.assert_allclose(Yte, Ytr, atol=1e-6)


def test_whitened_scores():
    _, labels, _, m = _full_rank(2)
    ind = class_indicators(labels)
    b = indicator_basis(ind)
    wm = from_eigenpairs(np.ones(labels.size), b.vectors)
    s = score_components(wm, ind)
    # the basis is re-sorted by first non-zero index; recover which axis is which
    lead = np.abs(ind.E.T @ wm.eigenvectors).max(axis=0) > 1e-12
    assert lead.sum() == ind.n_classes
    np.testing.assert_allclose(s.rayleigh[~lead], 0.0, atol=1e-12)
    np.testing.assert_allclose(s.cmvca[~lead], 0.0, atol=1e-12)
    np.testing.assert_allclose(np.sort(s.rayleigh[lead]), np.sort(1.0 / ind.counts), atol=1e-12)


def test_cmvda_r_basis():
    b = cmvda_r_basis(9, seed=4)
    np.testing.assert_allclose(b.vectors.T @ b.vectors, np.eye(9), atol=1e-12)
    np.testing.assert_allclose(b.vectors[:, 0], 1 / 3, atol=1e-15)
    again = cmvda_r_basis(9, seed=4)
    assert b.vectors.tobytes() == again.vectors.tobytes()
    assert not np.array_equal(b.vectors, cmvda_r_basis(9, seed=5).vectors)
    with pytest.raises(ValueError):
        cmvda_r_basis(0)


def test_rank_deficient_basis_stays_in_span():
    rng = np.random.default_rng(0)
    X, labels = random_labeled(rng, 30, 3, 2, shift=4.0)
    spec = KernelSpec.gaussian(2.0 * sigma_heuristic(X))
    m = decompose(gram(X, spec))
    assert m.rank < 30
    wm = whiten(m)
    for base in (indicator_basis(class_indicators(labels)), cmvda_r_basis(30, seed=1)):
        b = whitened_basis(wm, base)
        assert b.n_vectors == m.rank and b.in_span
        Q = b.vectors
        np.testing.assert_allclose(Q.T @ Q, np.eye(m.rank), atol=1e-10)
        np.testing.assert_allclose(wm.projector @ Q, Q, atol=1e-8)
        assert whitened_basis(wm, b) is b
    with pytest.raises(ValueError):
        cmvda_embed_train(labels, m.rank + 1, whitened=wm)


def test_whiten_rejects_zero_rank():
    with pytest.raises(ValueError):
        whiten(decompose(np.zeros((3, 3))))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_whitened_score_relation_with_centering_term(seed):
    # unit eigenvalues, any orthonormal basis:
    # rayleigh_d = sum_k (u_d . e_k)^2 and cmvca_d = (2/N) (sum_k N_k (u_d . e_k)^2 - N (u_d . e)^2)
    rng = np.random.default_rng(seed)
    C = int(rng.integers(2, 5))
    labels = np.concatenate([np.arange(C), rng.integers(0, C, int(rng.integers(0, 12)))])
    ind = class_indicators(labels, C)
    N = labels.size
    Q, _ = np.linalg.qr(rng.standard_normal((N, N)))
    m = from_eigenpairs(np.ones(N), Q)
    s = score_components(m, ind)
    U = m.eigenvectors
    P = U.T @ ind.E
    np.testing.assert_allclose(s.rayleigh, np.sum(P ** 2, axis=1), atol=1e-12)
    expect = (2.0 / N) * ((P ** 2) @ ind.counts - N * (U.T @ ind.e) ** 2)
    np.testing.assert_allclose(s.cmvca, expect, atol=1e-12)

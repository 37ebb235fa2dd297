import numpy as np
import pytest

from cmvca.approx import nystrom, rff, subspace_from_features
from cmvca.components import class_indicators, criterion_total, score_components
from cmvca.errors import NumericError
from cmvca.kernels import KernelSpec, cross_gram, gram, sigma_heuristic
from cmvca.spectral import decompose

from conftest import random_labeled


def test_nystrom_full_reference_is_exact(rng):
    X = rng.standard_normal((30, 6))
    spec = KernelSpec.gaussian(sigma_heuristic(X) * 0.6)
    feat = nystrom(X, spec, 30, seed=0)
    np.testing.assert_allclose(feat.gram(), gram(X, spec), atol=1e-7)
    assert feat.meta["reference_indices"] == list(range(30))


def test_nystrom_interpolates_references(rng):
    X = rng.standard_normal((40, 3))
    spec = KernelSpec.gaussian(1.0)
    feat = nystrom(X, spec, 10, seed=2)
    ref = feat.meta["reference_indices"]
    G = feat.gram()
    K = gram(X, spec)
    np.testing.assert_allclose(G[np.ix_(ref, ref)], K[np.ix_(ref, ref)], atol=1e-7)
    assert feat.n_features <= 10
    Y = rng.standard_normal((5, 3))
    assert feat.kernel_vectors(Y).shape == (40, 5)


def test_nystrom_deterministic_and_checked(rng):
    X = rng.standard_normal((20, 2))
    a = nystrom(X, KernelSpec.gaussian(1.0), 8, seed=3)
    b = nystrom(X, KernelSpec.gaussian(1.0), 8, seed=3)
    assert a.representation.tobytes() == b.representation.tobytes()
    with pytest.raises(ValueError):
        nystrom(X, KernelSpec.gaussian(1.0), 21, seed=0)


def test_rff_shapes_and_bounds(rng):
    X = rng.standard_normal((15, 4))
    f = rff(X, 1.0, 64, seed=0)
    assert f.representation.shape == (64, 15)
    assert np.abs(f.representation).max() <= np.sqrt(2 / 64) + 1e-15
    with pytest.raises(ValueError):
        f.transform(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        rff(X, 0.0, 8, seed=0)


def test_rff_approximates_kernel(rng):
    X = rng.standard_normal((20, 3))
    sigma = sigma_heuristic(X)
    f = rff(X, sigma, 8192, seed=1)
    err = np.abs(f.gram() - gram(X, KernelSpec.gaussian(sigma))).max()
    assert err < 0.1


def test_subspace_bridge_matches_exact(rng):
    X, labels = random_labeled(rng, 25, 3, 8)
    spec = KernelSpec.gaussian(0.6 * sigma_heuristic(X))
    exact = decompose(gram(X, spec))
    approx = subspace_from_features(nystrom(X, spec, 25, seed=0))
    ind = class_indicators(labels)
    assert approx.rank == exact.rank
    np.testing.assert_allclose(approx.eigenvalues, exact.eigenvalues, rtol=1e-6, atol=1e-9)
    a, b = score_components(approx, ind), score_components(exact, ind)
    np.testing.assert_allclose(a.cmvca, b.cmvca, atol=1e-6 * b.cmvca.max())
    assert criterion_total(approx, ind) == pytest.approx(criterion_total(exact, ind), rel=1e-6)


def test_subspace_bridge_rejects_degenerate():
    with pytest.raises(NumericError):
        subspace_from_features(np.zeros((3, 4)))
    with pytest.raises(NumericError):
        subspace_from_features(np.array([[np.inf, 0.0]]))

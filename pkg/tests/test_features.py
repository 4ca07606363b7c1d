import numpy as np
import pytest

from asrc.errors import DimensionMismatch, InvalidDimension, ParseError
from asrc.features import PcaModel, fit_pca, project


def test_rank_one_cloud_recovers_direction(rng):
    v = rng.standard_normal(7)
    v /= np.linalg.norm(v)
    X = np.outer(v, rng.standard_normal(40)) + 3.0
    model = fit_pca(X, 1)
    assert abs(model.basis[:, 0] @ v) == pytest.approx(1, abs=1e-10)
    assert model.basis[np.abs(model.basis[:, 0]).argmax(), 0] > 0


def test_full_rank_projection_preserves_distances(rng):
    X = rng.standard_normal((5, 30))
    Z = project(fit_pca(X, 5), X)
    dX = np.linalg.norm(X[:, :, None] - X[:, None, :], axis=0)
    dZ = np.linalg.norm(Z[:, :, None] - Z[:, None, :], axis=0)
    assert np.allclose(dX, dZ)


def test_explained_matches_covariance_eigenvalues(rng):
    X = rng.standard_normal((6, 25)) * np.arange(1, 7)[:, None]
    model = fit_pca(X, 3)
    ev = np.sort(np.linalg.eigvalsh(np.cov(X)))[::-1][:3]
    assert np.allclose(model.explained, ev)
    assert np.allclose(model.basis.T @ model.basis, np.eye(3))


def test_dimension_bounds(rng):
    X = rng.standard_normal((10, 4))
    with pytest.raises(InvalidDimension):
        fit_pca(X, 4)
    with pytest.raises(InvalidDimension):
        fit_pca(X, 0)
    with pytest.raises(DimensionMismatch):
        project(fit_pca(X, 2), np.ones(3))


def test_json_round_trip(rng):
    model = fit_pca(rng.standard_normal((6, 20)), 3)
    back = PcaModel.from_json(model.to_json())
    for f in ("mean", "basis", "explained"):
        assert np.array_equal(getattr(model, f), getattr(back, f))
    y = rng.standard_normal(6)
    assert np.array_equal(project(model, y), project(back, y))
    with pytest.raises(ParseError):
        PcaModel.from_json('{"format": "other"}')

import numpy as np
import pytest

from concepteva.errors import ProtocolError
from concepteva.project import pca_project, project


def planar_cloud(n, ambient_dim, seed, offset=2.5):
    """n points on a random 2D plane embedded in ambient_dim dimensions.

    Returns (vectors dict, planar coordinates) so tests can compare
    distance matrices against the known intrinsic geometry.
    """
    rng = np.random.default_rng(seed)
    planar = rng.normal(scale=1.5, size=(n, 2))
    basis, _ = np.linalg.qr(rng.normal(size=(ambient_dim, 2)))
    cloud = planar @ basis.T + offset
    return {f"c{i:03d}": cloud[i] for i in range(n)}, planar


def distance_matrix(points):
    pts = np.asarray(points)
    return np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)


class TestPcaProject:
    def test_identical_vectors_all_at_origin(self):
        v = np.ones(6) / np.sqrt(6)
        result = pca_project({"a": v, "b": v, "c": v})
        for xy in result.coords.values():
            assert xy == (0.0, 0.0)

    def test_single_vector_at_origin(self):
        result = pca_project({"only": np.ones(4)})
        assert result.coords["only"] == (0.0, 0.0)

    def test_planar_cloud_distances_preserved(self):
        vectors, planar = planar_cloud(4, 10, seed=5)
        result = pca_project(vectors)
        ids = sorted(vectors)
        ours = distance_matrix([result.coords[cid] for cid in ids])
        truth = distance_matrix(planar)
        np.testing.assert_allclose(ours, truth, rtol=1e-6, atol=1e-9)

    def test_two_points_rank_one_second_axis_zero(self):
        result = pca_project({"a": np.zeros(5), "b": np.ones(5)})
        for _, y in result.coords.values():
            assert y == 0.0
        xs = sorted(x for x, _ in result.coords.values())
        assert xs[0] == pytest.approx(-xs[1])
        assert xs[1] > 0

    def test_deterministic_and_sign_fixed(self):
        vectors, _ = planar_cloud(20, 8, seed=9)
        a = pca_project(vectors)
        b = pca_project(vectors)
        assert a == b

    def test_variance_ordering(self):
        vectors, _ = planar_cloud(40, 12, seed=13)
        result = pca_project(vectors)
        coords = np.array([result.coords[cid] for cid in sorted(vectors)])
        assert coords[:, 0].var() >= coords[:, 1].var()

    def test_gram_path_matches_covariance_geometry(self):
        # ambient dim above the Gram threshold exercises the n x n path
        vectors, planar = planar_cloud(15, 300, seed=21)
        result = pca_project(vectors)
        ids = sorted(vectors)
        ours = distance_matrix([result.coords[cid] for cid in ids])
        np.testing.assert_allclose(ours, distance_matrix(planar), rtol=1e-6, atol=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            pca_project({"a": np.ones(3), "b": np.ones(4)})

    def test_empty_input(self):
        with pytest.raises(ValueError):
            pca_project({})

    def test_coords_cover_all_inputs_and_are_finite(self):
        vectors, _ = planar_cloud(12, 6, seed=2)
        result = pca_project(vectors)
        assert set(result.coords) == set(vectors)
        for x, y in result.coords.values():
            assert np.isfinite(x) and np.isfinite(y)


class TestProjectDispatch:
    def test_pca_dispatch_equals_pca_project(self):
        vectors, _ = planar_cloud(8, 5, seed=1)
        assert project(vectors, "pca") == pca_project(vectors)

    def test_external_without_provider_is_error(self):
        with pytest.raises(ValueError, match="provider"):
            project({"a": np.ones(3)}, "external:umap")

    def test_unknown_method(self):
        with pytest.raises(ValueError, match="unknown"):
            project({"a": np.ones(3)}, "tsne")

    def test_provider_output_validated_non_finite(self):
        class BadProvider:
            def project(self, vectors):
                return {cid: (float("nan"), 0.0) for cid in vectors}

        with pytest.raises(ProtocolError, match="non-finite"):
            project({"a": np.ones(3)}, "external:bad", BadProvider())

    def test_provider_output_validated_missing_concept(self):
        class PartialProvider:
            def project(self, vectors):
                return {}

        with pytest.raises(ProtocolError, match="omitted"):
            project({"a": np.ones(3)}, "external:partial", PartialProvider())

    def test_valid_provider_passes_through(self):
        class GridProvider:
            def project(self, vectors):
                return {cid: (float(i), -float(i)) for i, cid in enumerate(sorted(vectors))}

        result = project({"a": np.ones(3), "b": np.zeros(3)}, "external:grid", GridProvider())
        assert result.method == "external:grid"
        assert result.coords == {"a": (0.0, -0.0), "b": (1.0, -1.0)}

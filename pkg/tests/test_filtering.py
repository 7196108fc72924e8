import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singdetect.data import PointSet
from singdetect.filtering import (KdeParams, KnnParams, kde_density, kde_filter, knn_filter,
                                  knn_indices, knn_scores, silverman_bandwidth)


def brute_density(pts, h):
    """Pure-Python evaluation of the Gaussian KDE, self term included."""
    n = len(pts)
    out = []
    for a, b in pts:
        s = 0.0
        for c, d in pts:
            s += math.exp(-((a - c) ** 2 + (b - d) ** 2) / (2 * h * h)) / (2 * math.pi)
        out.append(s / (n * h * h))
    return out


def brute_knn(pts, k):
    """Full sort by (distance, index), self excluded."""
    out = []
    for i, (a, b) in enumerate(pts):
        order = sorted((((a - c) ** 2 + (b - d) ** 2, j) for j, (c, d) in enumerate(pts) if j != i))
        out.append([j for _, j in order[:k]])
    return out


def circle_with_corners():
    ang = 2 * np.pi * np.arange(50) / 50
    circle = np.column_stack([0.5 * np.cos(ang), 0.5 * np.sin(ang)])
    far = np.array([[0.9, 0.9], [-0.9, 0.9], [-0.9, -0.9], [0.9, -0.9], [-0.9, 0.0]])
    return PointSet(np.vstack([circle, far]))


class TestKdeDensity:
    def test_single_point(self):
        assert kde_density(PointSet([[0.3, 0.7]]), 1.0)[0] == pytest.approx(1 / (2 * math.pi), rel=1e-15)

    def test_coincident(self):
        np.testing.assert_allclose(kde_density(PointSet([[0, 0], [0, 0]]), 1.0),
                                   [1 / (2 * math.pi)] * 2, rtol=1e-15)

    def test_two_points(self):
        # 0.5 / (2 pi) * (1 + exp(-1/2)), evaluated with mpmath
        assert kde_density(PointSet([[0, 0], [1, 0]]), 1.0)[0] == pytest.approx(
            0.127843647860974621655, rel=1e-14)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(4)
        pts = rng.normal(size=(40, 2))
        np.testing.assert_allclose(kde_density(PointSet(pts), 0.37), brute_density(pts.tolist(), 0.37),
                                   rtol=1e-12)

    def test_rejects_bad_bandwidth(self):
        with pytest.raises(ValueError):
            kde_density(PointSet([[0, 0]]), 0.0)


class TestSilverman:
    def test_unit(self):
        assert silverman_bandwidth(1, 2) == 1.0

    @pytest.mark.parametrize("n,h", [(100, 0.464158883361277889), (13664, 0.204520584130190748)])
    def test_values(self, n, h):
        assert silverman_bandwidth(n, 2) == pytest.approx(h, rel=1e-13)


class TestKdeFilter:
    def test_tiny_gamma_keeps_everything(self):
        ps = circle_with_corners()
        rep = kde_filter(ps, KdeParams(1e-9))
        assert rep.kept_indices.tolist() == list(range(len(ps)))

    def test_corners_removed(self):
        ps = circle_with_corners()
        rep = kde_filter(ps, KdeParams(0.6))
        rho = brute_density(ps.points.tolist(), silverman_bandwidth(len(ps)))
        expected = [i for i, r in enumerate(rho) if r > 0.6 * max(rho)]
        assert expected == list(range(50))
        assert rep.kept_indices.tolist() == expected
        np.testing.assert_array_equal(rep.kept.points, ps.points[:50])

    def test_larger_cluster_survives(self):
        pts = np.vstack([np.zeros((6, 2)), np.full((3, 2), 5.0)])
        rep = kde_filter(PointSet(pts), KdeParams(0.9, 1.0))
        rho = brute_density(pts.tolist(), 1.0)
        assert rep.kept_indices.tolist() == [i for i, r in enumerate(rho) if r > 0.9 * max(rho)]
        assert rep.kept_indices.tolist() == list(range(6))

    def test_report_fields(self):
        ps = circle_with_corners()
        rep = kde_filter(ps, KdeParams(0.6))
        assert rep.threshold_value == pytest.approx(0.6 * rep.scores.max())
        d = rep.to_dict()
        assert d["params"]["method"] == "kde" and d["n_kept"] == 50
        assert d["params"]["h"] == pytest.approx(silverman_bandwidth(55))

    @pytest.mark.parametrize("gamma", [0.0, 1.0, -0.2, 1.5])
    def test_gamma_range(self, gamma):
        with pytest.raises(ValueError):
            KdeParams(gamma)


class TestKnnFilter:
    line = PointSet([[0, 0], [1, 0], [2, 0]])

    def test_k1(self):
        rep = knn_filter(self.line, KnnParams(0.5, 1))
        np.testing.assert_array_equal(rep.scores, [1, 1, 1])
        assert rep.threshold_value == 2.0
        assert rep.kept_indices.tolist() == [0, 1, 2]

    def test_k2(self):
        rep = knn_filter(self.line, KnnParams(0.6, 2))
        np.testing.assert_array_equal(rep.scores, [5, 2, 5])
        assert rep.threshold_value == pytest.approx(10 / 3)
        assert rep.kept_indices.tolist() == [1]

    def test_tiny_gamma(self):
        ps = circle_with_corners()
        assert knn_filter(ps, KnnParams(1e-9, 3)).kept_indices.size == len(ps)

    def test_k_too_large(self):
        with pytest.raises(ValueError):
            knn_filter(self.line, KnnParams(0.5, 3))

    def test_ties_by_index(self):
        # 1 and 2 are equidistant from 0; the lower index wins
        ps = PointSet([[0, 0], [1, 0], [-1, 0], [0, 3]])
        assert knn_indices(ps, 1)[0].tolist() == [1]
        assert knn_indices(ps, 2)[0].tolist() == [1, 2]

    def test_all_coincident_keeps_argmin(self):
        rep = knn_filter(PointSet(np.zeros((4, 2))), KnnParams(0.5, 2))
        assert rep.kept_indices.size >= 1

    def test_self_excluded_with_duplicates(self):
        ps = PointSet([[0, 0], [0, 0], [1, 0]])
        nb = knn_indices(ps, 1)
        assert nb[0].tolist() == [1] and nb[1].tolist() == [0]


point_sets = st.integers(0, 10_000).map(
    lambda s: np.random.default_rng(s).uniform(-1, 1, (int(np.random.default_rng(s).integers(8, 60)), 2)))


@settings(max_examples=40, deadline=None)
@given(point_sets, st.integers(1, 6))
def test_knn_matches_full_sort(pts, k):
    k = min(k, len(pts) - 1)
    assert knn_indices(pts, k).tolist() == brute_knn(pts.tolist(), k)


def _run(method, pts, gamma):
    ps = PointSet(pts)
    if method == "kde":
        return kde_filter(ps, KdeParams(gamma))
    return knn_filter(ps, KnnParams(gamma, 4))


@settings(max_examples=40, deadline=None)
@given(point_sets, st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.sampled_from(["kde", "knn"]))
def test_monotone_in_gamma(pts, g1, g2, method):
    g1, g2 = sorted((g1, g2))
    assert set(_run(method, pts, g2).kept_indices) <= set(_run(method, pts, g1).kept_indices)


@settings(max_examples=30, deadline=None)
@given(point_sets, st.floats(-50, 50), st.floats(-50, 50))
def test_translation_invariance(pts, dx, dy):
    moved = pts + [dx, dy]
    assert np.array_equal(knn_filter(pts, KnnParams(0.5, 3)).kept_indices,
                          knn_filter(moved, KnnParams(0.5, 3)).kept_indices)
    # densities agree to rounding; compare away from the threshold
    a = kde_filter(PointSet(pts), KdeParams(0.5, 0.3))
    b = kde_filter(PointSet(moved), KdeParams(0.5, 0.3))
    np.testing.assert_allclose(a.scores, b.scores, rtol=1e-9)
    clear = np.abs(a.scores - a.threshold_value) > 1e-9 * a.scores.max()
    assert np.array_equal(np.isin(np.arange(len(pts)), a.kept_indices)[clear],
                          np.isin(np.arange(len(pts)), b.kept_indices)[clear])


@settings(max_examples=30, deadline=None)
@given(point_sets, st.sampled_from([0.5, 2.0, 4.0, 0.125]))
def test_knn_scale_covariance(pts, s):
    # powers of two keep the scaling exact in floating point
    d1, _ = knn_scores(pts, 3)
    d2, _ = knn_scores(pts * s, 3)
    np.testing.assert_array_equal(d2, d1 * s * s)
    assert np.array_equal(knn_filter(pts, KnnParams(0.6, 3)).kept_indices,
                          knn_filter(pts * s, KnnParams(0.6, 3)).kept_indices)


@settings(max_examples=30, deadline=None)
@given(point_sets, st.integers(0, 2 ** 31), st.sampled_from(["kde", "knn"]))
def test_permutation_stability(pts, seed, method):
    perm = np.random.default_rng(seed).permutation(len(pts))
    a = _run(method, pts, 0.5)
    b = _run(method, pts[perm], 0.5)
    kept_a = {tuple(p) for p in a.kept.points}
    kept_b = {tuple(p) for p in b.kept.points}
    if method == "kde":
        # summation order changes the last bits; skip points sitting on the threshold
        near = np.abs(a.scores - a.threshold_value) < 1e-9 * a.scores.max()
        edge = {tuple(p) for p in pts[near]}
        kept_a -= edge
        kept_b -= edge
    assert kept_a == kept_b

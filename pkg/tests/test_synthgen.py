import json
import math

import numpy as np
import pytest

from singdetect.data import RectDomain, merge_batches
from singdetect.synthgen import (HALF_STRIP, SQUARE, CurveSpec, GenerationError, GenParams,
                                 circle_distance, generate, grid_points)


class TestGrid:
    def test_zero_batches_is_grid(self):
        data = generate(CurveSpec.circle(), GenParams(n_batches=0))
        assert data.R == 0 and len(data) == 25
        np.testing.assert_array_equal(data.batches[0].points, grid_points(SQUARE, 5))

    def test_grid_corners(self):
        g = grid_points(SQUARE, 3)
        assert {tuple(p) for p in g} == {(x, y) for x in (-1, 0, 1) for y in (-1, 0, 1)}


class TestCircleFixture:
    data = generate(CurveSpec.circle(), GenParams(seed=0))

    def test_sizes(self):
        assert [len(b) for b in self.data.batches] == [25] + [18] * 8 + [17] * 9

    def test_tube_widths(self):
        p = GenParams()
        for i, batch in enumerate(self.data.batches[1:], start=1):
            d = circle_distance(batch.points)
            assert d.max() <= 1.5 * p.w0 * p.q ** i

    def test_batches_tighten(self):
        med = [np.median(circle_distance(b.points)) for b in self.data.batches[1:]]
        assert all(a > b for a, b in zip(med, med[1:]))

    def test_inside_domain(self):
        assert SQUARE.contains(merge_batches(self.data).points).all()

    def test_deterministic(self):
        again = generate(CurveSpec.circle(), GenParams(seed=0))
        assert all(a.points.tobytes() == b.points.tobytes()
                   for a, b in zip(self.data.batches, again.batches))

    def test_seed_matters(self):
        other = generate(CurveSpec.circle(), GenParams(seed=1))
        assert other.batches[1].points.tobytes() != self.data.batches[1].points.tobytes()


class TestOutliers:
    def test_counts_and_placement(self):
        p = GenParams(n_batches=4, outlier_fraction=0.1, seed=2)
        data = generate(CurveSpec.circle(), p)
        for i, batch in enumerate(data.batches[1:], start=1):
            n = p.size_of(i)
            assert len(batch) == n + math.ceil(0.1 * n)
            # tube points first, outliers appended
            assert circle_distance(batch.points[:n]).max() <= 1.5 * p.tube_width(i)


class TestCurves:
    @pytest.mark.parametrize("name", ["circle", "lshape", "xshape", "semicircles"])
    def test_named_curves_generate(self, name):
        spec = CurveSpec.named(name)
        data = generate(spec, GenParams(n_batches=5, seed=4))
        pts = merge_batches(data).points
        assert spec.domain.contains(pts).all()
        last = data.batches[-1].points
        assert spec.tube_distance(last).max() <= GenParams().tube_width(5) * (1 + 1e-9)

    def test_semicircles_domain(self):
        assert CurveSpec.semicircles().domain == HALF_STRIP

    def test_semicircles_zero_set(self):
        spec = CurveSpec.semicircles()
        for r in (0.5, 0.75):
            t = np.linspace(-1.5, 1.5, 7)
            assert np.abs(spec.F(np.column_stack([r * np.cos(t), r * np.sin(t)]))).max() < 1e-14

    def test_zero_set_outside_domain(self):
        spec = CurveSpec.circle(domain=RectDomain(2, 3, 2, 3))
        with pytest.raises(GenerationError):
            generate(spec, GenParams(n_batches=1, max_draws=4096))

    def test_from_file(self, tmp_path):
        f = tmp_path / "c.json"
        f.write_text(json.dumps({"degree": 1, "coefficients": [0.0, 1.0, -1.0]}))
        spec = CurveSpec.named(f"poly:{f}")
        assert spec.degree == 1 and spec.domain == SQUARE

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            CurveSpec.named("spiral")

    def test_coefficient_count_checked(self):
        with pytest.raises(ValueError):
            CurveSpec.custom_poly([1, 2], 2)


@pytest.mark.parametrize("kw", [{"q": 1.0}, {"q": 0.0}, {"w0": 0}, {"grid": 1},
                                {"outlier_fraction": 1.5}, {"n_batches": -1}])
def test_params_validated(kw):
    with pytest.raises(ValueError):
        GenParams(**kw)

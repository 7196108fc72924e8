import io
import math

import numpy as np
import pytest

from singdetect.basis import Basis
from singdetect.data import RectDomain
from singdetect.diagnostics import TracedCurve, radius_function, trace_zero_set
from singdetect.fitting import DetectionModel
from singdetect.synthgen import SQUARE, CurveSpec


def model_for(name):
    spec = CurveSpec.named(name)
    return DetectionModel(spec.basis, spec.exact)


class TestTrace:
    def test_circle_radius(self):
        curve = trace_zero_set(model_for("circle"), SQUARE, 256)
        assert len(curve) == 1
        r = np.hypot(*curve.vertices().T)
        assert np.max(np.abs(r - 0.5)) <= 1e-3
        assert curve.length() == pytest.approx(math.pi, rel=1e-3)

    def test_closed_loop_repeats_first_vertex(self):
        seg = trace_zero_set(model_for("circle"), SQUARE, 64).segments[0]
        np.testing.assert_array_equal(seg[0], seg[-1])

    def test_vertices_on_zero_set(self):
        m = model_for("circle")
        curve = trace_zero_set(m, SQUARE, 128)
        assert np.max(np.abs(m(curve.vertices()))) <= curve.tolerance

    def test_xshape(self):
        curve = trace_zero_set(model_for("xshape"), SQUARE, 256)
        v = curve.vertices()
        assert np.max(np.abs(np.abs(v[:, 0]) - np.abs(v[:, 1]))) <= 1e-3
        # both diagonals are covered end to end
        assert curve.length() == pytest.approx(4 * math.sqrt(2), rel=1e-2)

    def test_constant_is_empty(self):
        m = DetectionModel(Basis.poly(1), [1.0, 0.0, 0.0])
        curve = trace_zero_set(m, SQUARE, 32)
        assert curve.empty and curve.vertices().shape == (0, 2)

    def test_curve_outside_domain(self):
        m = DetectionModel.normalized(Basis.poly(2), [-0.25, 0, 1, 0, 0, 1])
        assert trace_zero_set(m, RectDomain(2, 3, 2, 3), 32).empty

    @pytest.mark.parametrize("res", [16, 32, 64])
    def test_resolution_doubling_keeps_components(self, res):
        m = DetectionModel.normalized(Basis.poly(4), CurveSpec.semicircles().coefficients)
        dom = RectDomain(0.05, 1, -1, 1)
        assert len(trace_zero_set(m, dom, res)) == len(trace_zero_set(m, dom, 2 * res)) == 2

    def test_rejects_bad_resolution(self):
        with pytest.raises(ValueError):
            trace_zero_set(model_for("circle"), SQUARE, 0)

    def test_csv_output(self):
        curve = trace_zero_set(model_for("circle"), SQUARE, 8)
        buf = io.StringIO()
        curve.write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "segment_id,x,y"
        assert len(lines) == 1 + len(curve.vertices())


class TestRadius:
    def test_circle_samples(self):
        curve = trace_zero_set(model_for("circle"), SQUARE, 256)
        rs = radius_function(curve, 100)
        assert rs.count == 100
        assert np.max(np.abs(rs.values - 0.5)) <= 1e-3

    def test_single_sample(self):
        curve = trace_zero_set(model_for("circle"), SQUARE, 64)
        assert radius_function(curve, 1).count == 1

    def test_arc_length_midpoints(self):
        # a straight segment from (1, 0) to (3, 0): 4 bins have midpoints 1.25, 1.75, ...
        curve = TracedCurve([np.array([[1.0, 0.0], [3.0, 0.0]])], 1, SQUARE)
        np.testing.assert_allclose(radius_function(curve, 4).values, [1.25, 1.75, 2.25, 2.75])

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            radius_function(TracedCurve([], 8, SQUARE))

    def test_bad_count(self):
        curve = trace_zero_set(model_for("circle"), SQUARE, 16)
        with pytest.raises(ValueError):
            radius_function(curve, 0)

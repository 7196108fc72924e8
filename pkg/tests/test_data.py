import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singdetect.data import (BatchedPointSet, ParseError, PointSet, RectDomain,
                             ValidationError, load_points, merge_batches, parse_points,
                             save_points)
from singdetect.synthgen import CurveSpec, GenParams, generate


class TestLoadCsv:
    def test_plain_points(self):
        ps = parse_points("x,y\n0.5,0.0\n0.0,0.5")
        assert isinstance(ps, PointSet)
        np.testing.assert_array_equal(ps.points, [[0.5, 0.0], [0.0, 0.5]])

    def test_batched(self):
        data = parse_points("x,y,batch\n0,0,0\n1,1,1")
        assert isinstance(data, BatchedPointSet)
        assert data.R == 1
        assert [len(b) for b in data.batches] == [1, 1]
        np.testing.assert_array_equal(data.batches[1].points, [[1.0, 1.0]])

    def test_batches_grouped_in_source_order(self):
        data = parse_points("x,y,batch\n5,5,1\n0,0,0\n6,6,1\n1,1,0\n")
        np.testing.assert_array_equal(data.batches[0].points, [[0, 0], [1, 1]])
        np.testing.assert_array_equal(data.batches[1].points, [[5, 5], [6, 6]])

    def test_nan_rejected_with_line(self):
        with pytest.raises(ValidationError) as exc:
            parse_points("x,y\n0.1,nan")
        assert exc.value.line == 2

    def test_inf_rejected(self):
        with pytest.raises(ValidationError):
            parse_points("x,y\n0.1,0\ninf,0\n")

    def test_malformed_row_line_number(self):
        with pytest.raises(ParseError) as exc:
            parse_points("x,y\n0,0\n1,1\n0.3,abc\n")
        assert exc.value.line == 4

    def test_wrong_field_count(self):
        with pytest.raises(ParseError) as exc:
            parse_points("x,y\n0,0,0\n")
        assert exc.value.line == 2

    def test_header_required(self):
        with pytest.raises(ParseError) as exc:
            parse_points("0,0\n1,1\n")
        assert exc.value.line == 1

    def test_crlf(self):
        ps = parse_points("x,y\r\n1,2\r\n3,4\r\n")
        np.testing.assert_array_equal(ps.points, [[1, 2], [3, 4]])

    @pytest.mark.parametrize("text", ["x,y,batch\n0,0,-1\n", "x,y,batch\n0,0,0\n1,1,2\n"])
    def test_bad_batch_indices(self, text):
        with pytest.raises(ValidationError):
            parse_points(text)

    def test_byte_stream(self):
        ps = load_points(io.BytesIO(b"x,y\n1,2\n"), "csv")
        assert len(ps) == 1


class TestLoadJson:
    def test_points_with_domain(self):
        doc = {"domain": {"xmin": -1, "xmax": 1, "ymin": -1, "ymax": 1}, "points": [[0, 1], [1, 0]]}
        ps = parse_points(json.dumps(doc), "json")
        assert ps.domain == RectDomain(-1, 1, -1, 1)
        assert len(ps) == 2

    def test_batches(self):
        data = parse_points(json.dumps({"batches": [[[0, 0]], [[1, 1], [2, 2]]]}), "json")
        assert isinstance(data, BatchedPointSet)
        assert data.R == 1 and len(data) == 3

    def test_nonfinite(self):
        with pytest.raises(ValidationError):
            parse_points('{"points": [[0, NaN]]}', "json")

    def test_bad_shape(self):
        with pytest.raises(ParseError):
            parse_points('{"points": [[0, 1, 2]]}', "json")


class TestMerge:
    def test_concatenation(self):
        data = BatchedPointSet((PointSet([[0, 0]]), PointSet([[1, 1]])))
        np.testing.assert_array_equal(merge_batches(data).points, [[0, 0], [1, 1]])

    def test_single_batch_identity(self):
        ps = PointSet([[0.1, 0.2], [0.3, 0.4]])
        assert merge_batches(BatchedPointSet((ps,))) == ps

    def test_duplicates_kept(self):
        data = BatchedPointSet((PointSet([[0, 0], [0, 0]]), PointSet([[0, 0]])))
        assert len(merge_batches(data)) == 3

    def test_generated_fixture_size(self):
        data = generate(CurveSpec.circle(), GenParams(seed=0))
        assert data.R == 17 and len(data.batches) == 18
        merged = merge_batches(data)
        assert len(merged) == 322 == sum(len(b) for b in data.batches)


def test_rect_domain_validation():
    with pytest.raises(ValidationError):
        RectDomain(1, 0, 0, 1)


def test_pointset_is_read_only():
    ps = PointSet([[0, 0]])
    with pytest.raises(ValueError):
        ps.points[0, 0] = 1.0


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
coords = st.lists(st.tuples(finite, finite), min_size=1, max_size=30)


@settings(max_examples=60, deadline=None)
@given(coords, st.sampled_from(["csv", "json"]))
def test_roundtrip_pointset_bit_exact(pts, fmt):
    ps = PointSet(np.array(pts))
    buf = io.StringIO()
    save_points(ps, buf, fmt)
    back = parse_points(buf.getvalue(), fmt)
    assert back.points.tobytes() == ps.points.tobytes()


@settings(max_examples=40, deadline=None)
@given(st.lists(coords, min_size=1, max_size=5), st.sampled_from(["csv", "json"]))
def test_roundtrip_batched_bit_exact(batches, fmt):
    data = BatchedPointSet(tuple(PointSet(np.array(b)) for b in batches))
    buf = io.StringIO()
    save_points(data, buf, fmt)
    back = parse_points(buf.getvalue(), fmt)
    assert isinstance(back, BatchedPointSet)
    assert all(a.points.tobytes() == b.points.tobytes() for a, b in zip(data.batches, back.batches))


def test_file_roundtrip(tmp_path):
    data = generate(CurveSpec.circle(), GenParams(seed=3, n_batches=3))
    for name in ("d.csv", "d.json"):
        save_points(data, tmp_path / name)
        back = load_points(tmp_path / name)
        assert [b.points.tobytes() for b in back.batches] == [b.points.tobytes() for b in data.batches]


def test_merge_wraps_plain_array():
    merged = merge_batches([[0.0, 1.0], [2.0, 3.0]])
    assert isinstance(merged, PointSet) and len(merged) == 2

import math
from itertools import islice

import numpy as np
import pytest

from indisk.cell import (
    UnboundedCellError,
    build_zero_cell,
    escape_threshold,
    intensity_scale,
    measure_cell,
)
from indisk.geom import cut_polygon, halfplane_of, polygon_minus_disk_area
from indisk.sampler import (
    StreamKey,
    crofton_generator_stream,
    ring_width,
    voronoi_generator_stream,
)

SQUARE_STREAM = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (10.0, 0.0)]


def build_replicate(model, r, seed):
    key = StreamKey((seed, 0 if model == "voronoi" else 1, 0, 0))
    stream = (
        voronoi_generator_stream(r, key)
        if model == "voronoi"
        else crofton_generator_stream(r, key)
    )
    return build_zero_cell(stream)


class TestBuildZeroCell:
    def test_square_from_scripted_stream(self):
        res = build_zero_cell(iter(SQUARE_STREAM))
        assert len(res.polygon) == 4
        assert res.polygon.area() == pytest.approx(4.0, abs=1e-12)
        assert res.n_consumed == 5  # terminator consumed for the check only

    def test_terminator_never_cuts(self):
        res = build_zero_cell(iter(SQUARE_STREAM))
        _, changed = cut_polygon(res.polygon, halfplane_of((10.0, 0.0)))
        assert not changed

    def test_corner_cut_adds_vertex(self):
        cutter = 1.2 * math.cos(math.pi / 4), 1.2 * math.sin(math.pi / 4)
        stream = SQUARE_STREAM[:4] + [cutter, (10.0, 0.0)]
        res = build_zero_cell(iter(stream))
        assert len(res.polygon) == 5  # one cut replaces one vertex with two

    def test_cell_contains_unit_disk(self):
        for seed in range(20):
            res = build_replicate("voronoi", 4.0, seed)
            norms = np.hypot(res.polygon.vertices[:, 0], res.polygon.vertices[:, 1])
            assert norms.min() >= 1.0 - 1e-12
            assert res.polygon.inradius() >= 1.0 - 1e-9

    def test_indisk_exact_when_tangent_halfplane_active(self):
        for seed in range(20):
            res = build_replicate("voronoi", 4.0, seed)
            # the tangent generator has offset exactly 1; all others exceed 1,
            # so it is always the active minimum
            assert res.polygon.inradius() == 1.0
            active = {tuple(a) for a in res.polygon.anchors}
            assert (1.0, 0.0) in active

    def test_finite_stream_without_terminator(self):
        res = build_zero_cell(iter(SQUARE_STREAM[:4]))
        assert len(res.polygon) == 4
        assert res.n_consumed == 4

    def test_unsorted_stream_rejected(self):
        bad = [(1.0, 0.0), (0.0, 2.0), (-1.1, 0.0), (0.0, -2.0)]
        with pytest.raises(ValueError):
            build_zero_cell(iter(bad))

    def test_unbounded_exhausted_stream(self):
        with pytest.raises(UnboundedCellError):
            build_zero_cell(iter([(1.0, 0.0), (0.0, 1.0)]))

    def test_unbounded_safety_cap(self):
        # all generators in a narrow angular cone: never bounded
        pts = [
            (rho * math.cos(0.4 * math.sin(7.0 * k)), rho * math.sin(0.4 * math.sin(7.0 * k)))
            for k, rho in enumerate(np.linspace(1.01, 9, 40))
        ]

        def stream():
            yield (1.0, 0.0)
            yield from pts

        with pytest.raises(UnboundedCellError):
            build_zero_cell(stream())

    def test_termination_rule_sound(self):
        # consuming three extra rings past termination never changes the cell
        checked = 0
        for seed in range(100):
            r = 3.0 + (seed % 3)
            key = StreamKey((777, 0, seed, 0))
            stream = voronoi_generator_stream(r, key)
            res = build_zero_cell(stream)
            term_norm = math.hypot(*res.generators[-1])
            horizon = term_norm + 3.0 * ring_width("voronoi", r)
            poly = res.polygon
            for x, y in stream:
                if x * x + y * y > horizon * horizon:
                    break
                poly, changed = cut_polygon(poly, halfplane_of((x, y)))
                assert not changed
            assert np.array_equal(poly.vertices, res.polygon.vertices)
            checked += 1
        assert checked == 100

    def test_generators_consumed_matches_stream_position(self):
        key = StreamKey((88, 0, 0, 0))
        res = build_zero_cell(voronoi_generator_stream(5.0, key))
        assert res.n_consumed == len(res.generators)
        norms = np.hypot(res.generators[:, 0], res.generators[:, 1])
        assert norms[-1] >= res.polygon.circumradius()


class TestIntensityScale:
    def test_values(self):
        assert intensity_scale("voronoi", 10.0) == 400.0
        assert intensity_scale("crofton", 10.0) == 10.0
        with pytest.raises(ValueError):
            intensity_scale("hexagonal", 1.0)


class TestEscapeThreshold:
    def test_monotone_in_t(self):
        ts = [400.0, 4000.0, 40000.0]
        thr = [escape_threshold(t, 0.5) for t in ts]
        assert thr[0] > thr[1] > thr[2] > 1.0

    def test_alpha_zero_is_vacuous(self):
        assert escape_threshold(100.0, 0.0) is None

    def test_small_t_vacuous(self):
        # shrink factor nonpositive: event false by convention
        assert escape_threshold(2.0, 0.5) is None

    def test_value(self):
        t, alpha = 40000.0, 0.5
        expect = 1.0 / (1.0 - 2.0 ** 1.5 * t ** -0.5)
        assert escape_threshold(t, alpha) == pytest.approx(expect, rel=1e-15)

    def test_errors(self):
        with pytest.raises(ValueError):
            escape_threshold(0.0, 0.5)
        with pytest.raises(ValueError):
            escape_threshold(10.0, -0.1)


class TestMeasureCell:
    def test_square_record(self):
        res = build_zero_cell(iter(SQUARE_STREAM))
        rec = measure_cell(res.polygon, "voronoi", 2.0, [0.5], generators_consumed=res.n_consumed)
        assert rec.n_vertices == 4
        assert rec.area_outside_scaled == pytest.approx(4.0 - math.pi, abs=1e-12)
        assert rec.circumradius_scaled == pytest.approx(math.sqrt(2.0), abs=1e-12)
        assert rec.generators_consumed == 5
        # threshold (1 - 2^1.5 * 16^-0.5)^-1 = 3.414 > sqrt(2): flag false
        assert rec.a_event_flags[0.5] is False

    def test_flag_fires_for_large_t(self):
        res = build_zero_cell(iter(SQUARE_STREAM))
        rec = measure_cell(res.polygon, "voronoi", 100.0, [0.5])
        # threshold 1.0143 < sqrt(2): the square escapes
        assert rec.a_event_flags[0.5] is True

    def test_physical_scaling(self):
        res = build_zero_cell(iter(SQUARE_STREAM))
        rec = measure_cell(res.polygon, "voronoi", 10.0, [])
        assert rec.area_outside_physical == pytest.approx(100.0 * rec.area_outside_scaled, rel=1e-15)

    def test_crofton_uses_t_equal_r(self):
        res = build_zero_cell(iter(SQUARE_STREAM))
        rec_v = measure_cell(res.polygon, "voronoi", 50.0, [0.5])
        rec_c = measure_cell(res.polygon, "crofton", 50.0, [0.5])
        thr_v = escape_threshold(4 * 50.0 ** 2, 0.5)
        thr_c = escape_threshold(50.0, 0.5)
        assert rec_v.a_event_flags[0.5] == (math.sqrt(2) > thr_v)
        assert rec_c.a_event_flags[0.5] == (math.sqrt(2) > thr_c)

    def test_rejects_cell_missing_unit_disk(self):
        small = build_zero_cell(iter(SQUARE_STREAM)).polygon
        shrunk = type(small)(0.5 * small.vertices)
        with pytest.raises(ValueError):
            measure_cell(shrunk, "voronoi", 2.0, [])


class TestCrossModel:
    def test_crofton_cells_have_fewer_vertices(self):
        # growth r^(1/3) versus r^(2/3): clear separation already at r = 10
        r = 10.0
        n_v, n_c = [], []
        for seed in range(60):
            key_v = StreamKey((91, 0, 0, seed))
            key_c = StreamKey((91, 1, 0, seed))
            n_v.append(len(build_zero_cell(voronoi_generator_stream(r, key_v)).polygon))
            n_c.append(len(build_zero_cell(crofton_generator_stream(r, key_c)).polygon))
        assert np.mean(n_c) < np.mean(n_v)

    def test_crofton_replicates_valid(self):
        for seed in range(10):
            res = build_replicate("crofton", 30.0, seed)
            assert res.polygon.inradius() == 1.0
            assert polygon_minus_disk_area(res.polygon, 1.0) > 0.0

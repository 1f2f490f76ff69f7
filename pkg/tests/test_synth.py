"""Synthetic ink generators: determinism, validity, and agreement between
recordings and their attached ground-truth metadata."""

import numpy as np
import pytest
from scipy.integrate import quad

from graphokit.errors import InvalidParams
from graphokit.features.basic import path_length
from graphokit.features.events import count_intersections, count_pen_stops
from graphokit.ink import (Task, on_surface_strokes, segment_strokes,
                           validate_recording)
from graphokit.svcio import load_cohort, load_manifest
from graphokit.synth import (HC, LBD, STRONG_DELTA, ImpairmentDelta,
                             ImpairmentProfile, gen_cohort, gen_pentagons,
                             gen_scribble, gen_spiral, spiral_arc_length)


class TestProfiles:
    def test_velocity_scale_range(self):
        with pytest.raises(InvalidParams):
            ImpairmentProfile(velocity_scale=0.0)
        with pytest.raises(InvalidParams):
            ImpairmentProfile(velocity_scale=1.2)

    def test_negative_knobs_rejected(self):
        with pytest.raises(InvalidParams):
            ImpairmentProfile(radial_noise_sigma=-1.0)
        with pytest.raises(InvalidParams):
            ImpairmentProfile(pen_stop_count=-1)


class TestDeterminism:
    @pytest.mark.parametrize("gen", [gen_spiral, gen_scribble, gen_pentagons])
    def test_same_seed_same_trace(self, gen):
        prof = ImpairmentProfile(radial_noise_sigma=1.0, pen_stop_count=2,
                                 extra_lift_count=1, seed=42)
        a = gen(profile=prof)
        b = gen(profile=prof)
        np.testing.assert_array_equal(a.x, b.x)
        np.testing.assert_array_equal(a.t, b.t)
        np.testing.assert_array_equal(a.pen_status, b.pen_status)

    def test_different_seed_differs(self):
        a = gen_spiral(profile=ImpairmentProfile(radial_noise_sigma=1.0,
                                                 seed=1))
        b = gen_spiral(profile=ImpairmentProfile(radial_noise_sigma=1.0,
                                                 seed=2))
        assert not np.array_equal(a.x, b.x)


class TestStrictValidity:
    @pytest.mark.parametrize("gen,task", [(gen_spiral, Task.SPIRAL),
                                          (gen_scribble, Task.SENTENCE),
                                          (gen_pentagons, Task.PENTAGONS)])
    def test_strict_validation_passes(self, gen, task):
        prof = ImpairmentProfile(radial_noise_sigma=2.0, pen_stop_count=3,
                                 extra_lift_count=2, velocity_scale=0.7,
                                 width_drift=0.02, seed=7)
        rec = gen(profile=prof)
        validate_recording(rec, strict=True)
        assert rec.task is task


class TestGroundTruthMeta:
    def test_spiral_arc_length_closed_form(self):
        b, theta_max = 5.0, 6 * np.pi
        numeric, _ = quad(lambda th: np.hypot(b, b * th), 0.0, theta_max)
        assert spiral_arc_length(b, theta_max) == pytest.approx(numeric,
                                                                rel=1e-10)

    def test_spiral_path_matches_meta(self):
        rec = gen_spiral(b=5.0, turns=3.0)
        assert path_length(rec.x, rec.y) == \
            pytest.approx(rec.meta["true_arc_length"], rel=5e-3)
        assert rec.duration == pytest.approx(rec.meta["true_duration"],
                                             abs=0.02)

    def test_velocity_scale_stretches_duration(self):
        slow = gen_spiral(profile=ImpairmentProfile(velocity_scale=0.5))
        fast = gen_spiral()
        assert slow.meta["true_duration"] == pytest.approx(
            2 * fast.meta["true_duration"])
        assert slow.duration == pytest.approx(2 * fast.duration, rel=0.01)

    def test_scripted_stops_detected_exactly(self):
        # inserted holds duplicate a sample, so zero-tolerance detection
        # recovers the scripted count exactly
        for count in (0, 2, 5):
            rec = gen_spiral(profile=ImpairmentProfile(pen_stop_count=count,
                                                       seed=3))
            assert rec.meta["true_stop_count"] == count
            assert count_pen_stops(rec, radius=1e-6) == count

    def test_scribble_interruptions_match_meta(self):
        for lifts in (0, 2):
            prof = ImpairmentProfile(extra_lift_count=lifts, seed=5)
            rec = gen_scribble(word_count=4, profile=prof)
            strokes = on_surface_strokes(segment_strokes(rec))
            assert rec.meta["true_extra_lifts"] == lifts
            assert len(strokes) - 1 == rec.meta["true_interruptions"]

    def test_pentagon_crossings_match_meta(self):
        rec = gen_pentagons()
        strokes = on_surface_strokes(segment_strokes(rec))
        count, _ = count_intersections(strokes, "inter")
        assert count == rec.meta["true_intersections"] == 2

    def test_pentagon_width_matches_meta(self):
        rec = gen_pentagons(scale=1.3)
        width = rec.x.max() - rec.x.min()
        assert width == pytest.approx(rec.meta["true_width"], rel=0.02)

    def test_width_ordering_under_scale(self):
        small = gen_pentagons(scale=0.75)
        large = gen_pentagons(scale=1.0)
        assert small.meta["true_width"] < large.meta["true_width"]

    def test_invalid_args(self):
        with pytest.raises(InvalidParams):
            gen_spiral(b=0.0)
        with pytest.raises(InvalidParams):
            gen_scribble(word_count=0)
        with pytest.raises(InvalidParams):
            gen_pentagons(scale=-1.0)

    def test_too_many_stops_rejected(self):
        prof = ImpairmentProfile(pen_stop_count=50, seed=0)
        with pytest.raises(InvalidParams):
            gen_spiral(duration_s=1.0, profile=prof)


class TestCohort:
    def test_cohort_round_trip(self, tmp_path):
        manifest = gen_cohort(5, 5, ImpairmentDelta(), seed=11,
                              out_dir=tmp_path)
        assert len(manifest.entries) == 10
        labels = [e.label for e in manifest.entries]
        assert labels.count(HC) == 5 and labels.count(LBD) == 5

        reloaded = load_manifest(tmp_path / "manifest.json")
        per_task, problems = load_cohort(reloaded, strict=True)
        assert problems == []
        assert sorted(per_task) == ["pentagons", "sentence", "spiral"]
        for task, rows in per_task.items():
            assert len(rows) == 10
            for sid, label, rec in rows:
                assert len(rec) > 100

    def test_cohort_deterministic(self, tmp_path):
        a = gen_cohort(5, 5, STRONG_DELTA, seed=2, out_dir=tmp_path / "a")
        b = gen_cohort(5, 5, STRONG_DELTA, seed=2, out_dir=tmp_path / "b")
        for ea, eb in zip(a.entries, b.entries):
            assert ea.subject_id == eb.subject_id
            for task in ea.files:
                assert (tmp_path / "a" / ea.files[task]).read_text() == \
                    (tmp_path / "b" / eb.files[task]).read_text()

    def test_strong_delta_slows_and_shrinks(self, tmp_path):
        manifest = gen_cohort(6, 6, STRONG_DELTA, seed=4, out_dir=tmp_path)
        per_task, _ = load_cohort(manifest, strict=True)
        hc_dur = [rec.duration for _, lab, rec in per_task["spiral"]
                  if lab == HC]
        lbd_dur = [rec.duration for _, lab, rec in per_task["spiral"]
                   if lab == LBD]
        assert np.median(lbd_dur) > np.median(hc_dur)
        hc_w = [rec.x.max() - rec.x.min()
                for _, lab, rec in per_task["pentagons"] if lab == HC]
        lbd_w = [rec.x.max() - rec.x.min()
                 for _, lab, rec in per_task["pentagons"] if lab == LBD]
        assert np.median(lbd_w) < np.median(hc_w)

    def test_minimum_group_size(self, tmp_path):
        with pytest.raises(InvalidParams):
            gen_cohort(4, 5, out_dir=tmp_path)
        with pytest.raises(InvalidParams):
            gen_cohort(5, 5, out_dir=None)

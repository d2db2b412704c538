import numpy as np
import pytest

from proxitrack.rng import SplitMix64
from proxitrack.synth import (ScenarioConfig, generate, inject_id_switches,
                              perturb_tracks)


def test_splitmix64_known_stream_is_stable():
    rng = SplitMix64(0)
    first = [rng.next_u64() for _ in range(3)]
    # reference values of the standard SplitMix64 sequence for seed 0
    assert first == [
        0xE220A8397B1DCDAF,
        0x6E789E6AA1B965F4,
        0x06C45D188009454F,
    ]
    assert all(0.0 <= SplitMix64(7).random() < 1.0 for _ in range(100))


def test_generate_deterministic_bytes():
    cfg = ScenarioConfig(pedestrian_count=8, group_count=2, duration_frames=60,
                         seed=11, jitter_sigma=0.7, miss_rate=0.05,
                         false_positive_rate=0.02)
    d1, t1 = generate(cfg)
    d2, t2 = generate(cfg)
    assert d1.tobytes() == d2.tobytes()
    assert t1.tracks.tobytes() == t2.tracks.tobytes()
    assert t1.groups == t2.groups
    assert t1.violation_intervals == t2.violation_intervals


def test_zero_pedestrians_empty_outputs():
    dets, truth = generate(ScenarioConfig(pedestrian_count=0, duration_frames=10))
    assert dets.shape == (0, 9)
    assert truth.tracks.shape == (0, 9)
    assert truth.groups == [] and truth.violation_intervals == []


def test_noise_free_detections_equal_gt_boxes():
    cfg = ScenarioConfig(pedestrian_count=6, duration_frames=40, seed=4)
    dets, truth = generate(cfg)
    assert dets.shape == truth.tracks.shape
    assert np.array_equal(dets[:, [0, 2, 3, 4, 5]], truth.tracks[:, [0, 2, 3, 4, 5]])
    assert (dets[:, 1] == -1).all()
    assert truth.tracks[:, 0].min() == 1  # frames are 1-based


def test_all_pedestrians_span_the_full_clip():
    cfg = ScenarioConfig(pedestrian_count=7, group_count=1, duration_frames=50, seed=5)
    _, truth = generate(cfg)
    for tid in np.unique(truth.tracks[:, 1]):
        frames = truth.tracks[truth.tracks[:, 1] == tid][:, 0]
        assert frames.min() == 1 and frames.max() == 50 and len(frames) == 50


def test_tracks_stay_inside_arena():
    cfg = ScenarioConfig(pedestrian_count=10, duration_frames=200, seed=6,
                         speed_mean=3.0, curvature=0.01)
    _, truth = generate(cfg)
    x2 = truth.tracks[:, 2] + truth.tracks[:, 4]
    y2 = truth.tracks[:, 3] + truth.tracks[:, 5]
    assert truth.tracks[:, 2].min() >= 0 and truth.tracks[:, 3].min() >= -1e-9
    assert x2.max() <= cfg.arena_width + 1e-9
    assert y2.max() <= cfg.arena_height + 1e-9


def test_intervals_match_brute_force_scan():
    cfg = ScenarioConfig(pedestrian_count=10, group_count=2, duration_frames=120,
                         seed=9)
    _, truth = generate(cfg)
    member = truth.membership()

    # independent frame-by-frame pairwise scan over the gt bottom points
    by_frame = {}
    for row in truth.tracks:
        f, tid = int(row[0]), int(row[1])
        bp = (row[2] + row[4] / 2.0, row[3] + row[5])
        by_frame.setdefault(f, {})[tid] = bp
    close = {}
    for f in sorted(by_frame):
        ids = sorted(by_frame[f])
        for i, a in enumerate(ids):
            for b in ids[i + 1 :]:
                if member.get(a) is not None and member.get(a) == member.get(b):
                    continue
                pa, pb = by_frame[f][a], by_frame[f][b]
                if np.hypot(pa[0] - pb[0], pa[1] - pb[1]) < cfg.distance_threshold:
                    close.setdefault((a, b), []).append(f)
    expected = []
    for (a, b), frames in close.items():
        start = prev = frames[0]
        for f in frames[1:]:
            if f != prev + 1:
                expected.append((a, b, start, prev))
                start = f
            prev = f
        expected.append((a, b, start, prev))
    assert sorted(expected) == sorted(truth.violation_intervals)


def test_group_pairs_never_in_intervals():
    cfg = ScenarioConfig(pedestrian_count=9, group_count=3, duration_frames=80,
                         seed=10)
    _, truth = generate(cfg)
    member = truth.membership()
    assert len(truth.groups) == 3
    for a, b, _, _ in truth.violation_intervals:
        assert member.get(a) is None or member.get(a) != member.get(b)


def test_group_members_hold_their_offsets():
    cfg = ScenarioConfig(pedestrian_count=4, group_count=1, group_size_min=3,
                         group_size_max=3, duration_frames=60, seed=12)
    _, truth = generate(cfg)
    (ids,) = [g for g in truth.groups]
    a, b, c = sorted(ids)
    pts = {}
    for tid in (a, b, c):
        rows = truth.tracks[truth.tracks[:, 1] == tid]
        pts[tid] = np.column_stack([rows[:, 2] + rows[:, 4] / 2, rows[:, 3] + rows[:, 5]])
    d_ab = np.linalg.norm(pts[a] - pts[b], axis=1)
    d_bc = np.linalg.norm(pts[b] - pts[c], axis=1)
    assert np.abs(d_ab - 20.0).max() < 1e-6
    assert np.abs(d_bc - 20.0).max() < 1e-6


def test_abreast_group_alone_has_no_intervals():
    cfg = ScenarioConfig(pedestrian_count=3, group_count=1, group_size_min=3,
                         group_size_max=3, duration_frames=60, seed=13)
    _, truth = generate(cfg)
    assert truth.groups and truth.violation_intervals == []


def test_two_head_on_strangers_single_interval():
    cfg = ScenarioConfig(pedestrian_count=2, duration_frames=300, seed=68,
                         opposing_flows=True, speed_mean=0.6, speed_std=0.05,
                         distance_threshold=20.0, arena_width=700,
                         arena_height=600)
    _, truth = generate(cfg)
    assert len(truth.violation_intervals) == 1
    a, b, start, end = truth.violation_intervals[0]
    assert (end - start + 1) / cfg.fps >= 1.0


def test_opposing_flows_alternate_direction():
    cfg = ScenarioConfig(pedestrian_count=4, duration_frames=30, seed=14,
                         opposing_flows=True)
    _, truth = generate(cfg)
    dx = {}
    for tid in np.unique(truth.tracks[:, 1]):
        xs = truth.tracks[truth.tracks[:, 1] == tid][:, 2]
        dx[int(tid)] = xs[-1] - xs[0]
    signs = [np.sign(dx[t]) for t in sorted(dx)]
    assert signs == [1.0, -1.0, 1.0, -1.0]


def test_miss_and_fp_rates_change_detection_count():
    base = ScenarioConfig(pedestrian_count=10, duration_frames=100, seed=15)
    dets, _ = generate(base)
    missing = ScenarioConfig(pedestrian_count=10, duration_frames=100, seed=15,
                             miss_rate=0.2)
    dets_missing, _ = generate(missing)
    assert dets_missing.shape[0] < dets.shape[0]
    spurious = ScenarioConfig(pedestrian_count=10, duration_frames=100, seed=15,
                              false_positive_rate=0.5)
    dets_fp, _ = generate(spurious)
    assert dets_fp.shape[0] > dets.shape[0]


def test_infeasible_group_config_rejected():
    with pytest.raises(ValueError, match="infeasible"):
        generate(ScenarioConfig(pedestrian_count=3, group_count=2,
                                group_size_min=2, group_size_max=2))
    with pytest.raises(ValueError):
        ScenarioConfig(miss_rate=1.5).validate()
    with pytest.raises(ValueError):
        ScenarioConfig(group_size_min=1).validate()


def test_inject_id_switches_splits_every_track():
    cfg = ScenarioConfig(pedestrian_count=5, duration_frames=40, seed=16)
    _, truth = generate(cfg)
    switched = inject_id_switches(truth.tracks, 1.0, seed=99)
    assert len(np.unique(switched[:, 1])) == 10
    assert switched.shape == truth.tracks.shape
    # boxes untouched, only identities change
    assert np.array_equal(switched[:, [0, 2, 3, 4, 5]], truth.tracks[:, [0, 2, 3, 4, 5]])
    untouched = inject_id_switches(truth.tracks, 0.0, seed=99)
    assert np.array_equal(untouched, truth.tracks)


def test_perturb_tracks_keeps_ids_and_sizes():
    cfg = ScenarioConfig(pedestrian_count=4, duration_frames=30, seed=17)
    _, truth = generate(cfg)
    noisy = perturb_tracks(truth.tracks, 1.0, seed=5)
    assert np.array_equal(noisy[:, [0, 1, 4, 5]], truth.tracks[:, [0, 1, 4, 5]])
    assert not np.array_equal(noisy[:, 2], truth.tracks[:, 2])
    offsets = noisy[:, 2] - truth.tracks[:, 2]
    assert np.abs(offsets).max() < 6.0  # ~5 sigma
    assert np.array_equal(perturb_tracks(truth.tracks, 0.0), truth.tracks)

import itertools

import numpy as np
import pytest

from proxitrack.evaluation import evaluate_mot
from proxitrack.synth import ScenarioConfig, generate
from proxitrack.tracker import SortTracker, associate, iou, iou_matrix


def test_iou_identical_boxes():
    assert iou((2, 3, 4, 5), (2, 3, 4, 5)) == 1.0


def test_iou_disjoint_boxes():
    assert iou((0, 0, 1, 1), (5, 5, 1, 1)) == 0.0


def test_iou_known_overlap():
    assert abs(iou((0, 0, 2, 2), (1, 1, 2, 2)) - 1.0 / 7.0) < 1e-12


def test_iou_matrix_matches_scalar():
    rng = np.random.default_rng(40)
    a = np.column_stack([rng.uniform(0, 50, (6, 2)), rng.uniform(1, 10, (6, 2))])
    b = np.column_stack([rng.uniform(0, 50, (4, 2)), rng.uniform(1, 10, (4, 2))])
    m = iou_matrix(a, b)
    for i in range(6):
        for j in range(4):
            assert abs(m[i, j] - iou(a[i], b[j])) < 1e-12


def brute_force_associate(track_boxes, det_boxes, threshold):
    """Exhaustive optimum of the post-threshold matching."""
    overlaps = iou_matrix(track_boxes, det_boxes)
    n, m = overlaps.shape
    best_pairs, best_cost = [], np.inf
    k = min(n, m)
    for rows in itertools.permutations(range(n), k):
        for cols in itertools.permutations(range(m), k):
            cost = sum(
                1 - overlaps[r, c] if overlaps[r, c] >= threshold else 1e9
                for r, c in zip(rows, cols)
            )
            if cost < best_cost:
                best_cost = cost
                best_pairs = [
                    (r, c) for r, c in zip(rows, cols) if overlaps[r, c] >= threshold
                ]
    return sorted(best_pairs)


def test_associate_empty_sides():
    matches, ut, ud = associate(np.zeros((0, 4)), [(0, 0, 1, 1)], 0.3)
    assert matches == [] and ut == [] and ud == [0]
    matches, ut, ud = associate([(0, 0, 1, 1)], np.zeros((0, 4)), 0.3)
    assert matches == [] and ut == [0] and ud == []


def test_associate_exact_overlap_single_match():
    matches, ut, ud = associate([(0, 0, 2, 2)], [(0, 0, 2, 2)], 0.3)
    assert matches == [(0, 0)] and ut == [] and ud == []


def test_associate_below_threshold_discarded():
    matches, ut, ud = associate([(0, 0, 2, 2)], [(1.8, 1.8, 2, 2)], 0.3)
    assert matches == [] and ut == [0] and ud == [0]


def test_associate_three_by_three_matches_brute_force():
    tracks = [(0, 0, 4, 4), (10, 0, 4, 4), (20, 0, 4, 4)]
    dets = [(1, 0, 4, 4), (21, 0, 4, 4), (11, 0, 4, 4)]
    matches, _, _ = associate(tracks, dets, 0.1)
    assert sorted(matches) == brute_force_associate(tracks, dets, 0.1)


def test_associate_random_sweep_matches_brute_force():
    rng = np.random.default_rng(41)
    for _ in range(80):
        n, m = rng.integers(1, 5, size=2)
        tracks = np.column_stack(
            [rng.uniform(0, 30, (n, 2)), rng.uniform(2, 8, (n, 2))]
        )
        dets = np.column_stack(
            [rng.uniform(0, 30, (m, 2)), rng.uniform(2, 8, (m, 2))]
        )
        matches, ut, ud = associate(tracks, dets, 0.2)
        assert sorted(matches) == brute_force_associate(tracks, dets, 0.2)
        overlaps = iou_matrix(tracks, dets)
        for t, d in matches:
            assert overlaps[t, d] >= 0.2
        assert sorted(ut + [t for t, _ in matches]) == list(range(n))
        assert sorted(ud + [d for _, d in matches]) == list(range(m))


def _step_box(tracker, frame, boxes):
    dets = np.asarray(boxes, dtype=float).reshape(-1, 4)
    return tracker.step(frame, dets)


def test_track_confirmed_after_min_hits_outside_warmup():
    tracker = SortTracker(min_hits=3, max_age=5)
    for f in range(1, 6):  # warm-up elapses with no detections
        assert _step_box(tracker, f, np.zeros((0, 4))).shape[0] == 0
    emitted = {}
    for f in range(6, 16):
        out = _step_box(tracker, f, [(f * 2.0, 0.0, 10.0, 20.0)])
        emitted[f] = out[:, 1].astype(int).tolist()
    assert emitted[6] == [] and emitted[7] == []
    assert all(emitted[f] == [1] for f in range(8, 16))  # third hit onward


def test_track_emitted_from_first_frame_at_sequence_start():
    tracker = SortTracker(min_hits=3)
    out = _step_box(tracker, 1, [(0.0, 0.0, 10.0, 20.0)])
    assert out.shape[0] == 1 and int(out[0, 1]) == 1


def test_track_retired_after_max_age_and_new_id_on_return():
    tracker = SortTracker(min_hits=1, max_age=1)
    box = (5.0, 5.0, 10.0, 20.0)
    for f in range(1, 6):
        out = _step_box(tracker, f, [box])
        assert int(out[0, 1]) == 1
    for f in range(6, 8):  # absent for max_age + 1 frames
        assert _step_box(tracker, f, np.zeros((0, 4))).shape[0] == 0
    out = _step_box(tracker, 8, [box])
    assert int(out[0, 1]) == 2  # retired ids are never reused


def test_out_of_order_frame_rejected():
    tracker = SortTracker()
    _step_box(tracker, 5, np.zeros((0, 4)))
    with pytest.raises(ValueError, match="out of order"):
        _step_box(tracker, 5, np.zeros((0, 4)))
    with pytest.raises(ValueError, match="out of order"):
        _step_box(tracker, 3, np.zeros((0, 4)))


def test_output_boxes_have_positive_size():
    cfg = ScenarioConfig(pedestrian_count=6, duration_frames=60, seed=2,
                         jitter_sigma=1.5)
    dets, _ = generate(cfg)
    tracks = SortTracker(max_age=3).transform(dets)
    assert (tracks[:, 4] > 0).all() and (tracks[:, 5] > 0).all()


def test_transform_deterministic():
    cfg = ScenarioConfig(pedestrian_count=8, duration_frames=80, seed=3,
                         jitter_sigma=1.0, miss_rate=0.05)
    dets, _ = generate(cfg)
    a = SortTracker(max_age=3).transform(dets)
    b = SortTracker(max_age=3).transform(dets)
    assert np.array_equal(a, b)


def test_transform_empty_table():
    assert SortTracker().transform(np.zeros((0, 9))).shape == (0, 9)


def test_conf_and_class_pass_through():
    tracker = SortTracker(min_hits=1)
    dets = np.array([[4.0, 4.0, 10.0, 20.0, 0.87, 3.0]])
    out = tracker.step(1, dets)
    assert out[0, 6] == 0.87 and int(out[0, 7]) == 3


def test_noise_free_five_pedestrians_perfect_mota():
    cfg = ScenarioConfig(pedestrian_count=5, duration_frames=100, seed=7)
    dets, truth = generate(cfg)
    tracks = SortTracker().transform(dets)
    metrics = evaluate_mot(truth.tracks, tracks)
    assert metrics.mota == 1.0
    assert metrics.idsw == 0

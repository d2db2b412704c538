"""Tracking by detection: predict, associate on IoU, manage lifecycles.

The tracker is a sequential state machine over frames.  Each step
predicts every live track one frame ahead, solves a Hungarian
assignment on 1 - IoU, updates matched tracks, spawns tracks for
unmatched detections and retires tracks that have gone unseen for
longer than `max_age`.
"""

import numpy as np
from sklearn.base import BaseEstimator

from .assignment import linear_assignment
from .kalman import KalmanBoxFilter
from .validation import check_box, check_boxes, check_track_table


def iou(box_a, box_b):
    """Intersection over union of two (x, y, w, h) boxes; 0 when disjoint."""
    ax, ay, aw, ah = check_box(box_a)
    bx, by, bw, bh = check_box(box_b)
    ix = max(0.0, min(ax + aw, bx + bw) - max(ax, bx))
    iy = max(0.0, min(ay + ah, by + bh) - max(ay, by))
    inter = ix * iy
    return inter / (aw * ah + bw * bh - inter)


def iou_matrix(boxes_a, boxes_b):
    """Pairwise IoU between two (n, 4) / (m, 4) stacks of boxes."""
    a = check_boxes(boxes_a)
    b = check_boxes(boxes_b)
    if a.shape[0] == 0 or b.shape[0] == 0:
        return np.zeros((a.shape[0], b.shape[0]))
    ax1, ay1 = a[:, 0][:, None], a[:, 1][:, None]
    ax2, ay2 = (a[:, 0] + a[:, 2])[:, None], (a[:, 1] + a[:, 3])[:, None]
    bx1, by1 = b[:, 0][None, :], b[:, 1][None, :]
    bx2, by2 = (b[:, 0] + b[:, 2])[None, :], (b[:, 1] + b[:, 3])[None, :]
    iw = np.maximum(0.0, np.minimum(ax2, bx2) - np.maximum(ax1, bx1))
    ih = np.maximum(0.0, np.minimum(ay2, by2) - np.maximum(ay1, by1))
    inter = iw * ih
    union = (a[:, 2] * a[:, 3])[:, None] + (b[:, 2] * b[:, 3])[None, :] - inter
    return inter / union


_FORBIDDEN = 1e9  # finite sentinel for pairs below the IoU gate


def associate(track_boxes, det_boxes, iou_threshold):
    """Match tracks to detections by Hungarian assignment on 1 - IoU.

    Pairs whose IoU falls below `iou_threshold` are discarded back to
    the unmatched sets.  Returns (matches, unmatched_track_indices,
    unmatched_detection_indices) with matches as (track, detection)
    index pairs.
    """
    overlaps = iou_matrix(track_boxes, det_boxes)
    n, m = overlaps.shape
    if n == 0 or m == 0:
        return [], list(range(n)), list(range(m))
    viable = overlaps >= iou_threshold
    matches = []
    matched_t, matched_d = set(), set()
    if (viable.sum(axis=0) <= 1).all() and (viable.sum(axis=1) <= 1).all():
        # Candidates are mutually exclusive, so the optimal assignment
        # is forced; skip the Hungarian solve.
        for t, d in zip(*np.nonzero(viable)):
            matches.append((int(t), int(d)))
            matched_t.add(int(t))
            matched_d.add(int(d))
    else:
        cost = 1.0 - overlaps
        cost[~viable] = _FORBIDDEN
        for t, d in linear_assignment(cost):
            if viable[t, d]:
                matches.append((t, d))
                matched_t.add(t)
                matched_d.add(d)
    unmatched_t = [t for t in range(n) if t not in matched_t]
    unmatched_d = [d for d in range(m) if d not in matched_d]
    return matches, unmatched_t, unmatched_d


class KalmanTrack:
    """One tracked object: filter state plus lifecycle counters."""

    def __init__(self, track_id, box, conf, class_id, process_noise, measurement_noise):
        self.filter = KalmanBoxFilter(box, process_noise, measurement_noise)
        self.id = int(track_id)
        self.conf = float(conf)
        self.class_id = int(class_id)
        self.hits = 1
        self.age = 0
        self.time_since_update = 0

    def predict(self):
        self.filter.predict()
        self.age += 1
        self.time_since_update += 1
        return self.filter.box

    def update(self, box, conf, class_id):
        self.filter.update(box)
        self.conf = float(conf)
        self.class_id = int(class_id)
        self.hits += 1
        self.time_since_update = 0

    @property
    def box(self):
        return self.filter.box


class SortTracker(BaseEstimator):
    """Multi-object tracker with a batch `transform` over detection tables.

    Parameters
    ----------
    iou_threshold : float, default 0.3
        Minimum IoU for a track/detection match.
    max_age : int, default 1
        Frames a track survives without a matched detection.
    min_hits : int, default 3
        Updates required before a track is emitted (waived during the
        first `min_hits` frames of a sequence so tracks present from the
        start are reported from frame one).
    process_noise, measurement_noise : float, default 1.0
        Scales on the filter noise covariances.

    Track ids are assigned from 1 and never reused by an instance.
    """

    def __init__(self, iou_threshold=0.3, max_age=1, min_hits=3,
                 process_noise=1.0, measurement_noise=1.0):
        self.iou_threshold = iou_threshold
        self.max_age = max_age
        self.min_hits = min_hits
        self.process_noise = process_noise
        self.measurement_noise = measurement_noise
        self.reset()

    def reset(self):
        """Forget all tracks and restart id assignment at 1."""
        self._tracks = []
        self._next_id = 1
        self._last_frame = None
        self._frames_seen = 0

    def fit(self, X=None, y=None):
        return self

    def step(self, frame, detections):
        """Advance to `frame` and ingest its detections.

        Parameters
        ----------
        frame : int, strictly greater than the previous step's frame.
        detections : (n, >=4) array; columns x, y, w, h and optionally
            conf, class.

        Returns
        -------
        (m, 9) array of MOT rows (frame, id, x, y, w, h, conf, class, 1)
        for the confirmed tracks seen in this frame.
        """
        frame = int(frame)
        if self._last_frame is not None and frame <= self._last_frame:
            raise ValueError(
                f"frame {frame} out of order (last processed frame {self._last_frame})"
            )
        elapsed = 1 if self._last_frame is None else frame - self._last_frame
        self._last_frame = frame
        self._frames_seen += 1

        dets = np.asarray(detections, dtype=float)
        if dets.size == 0:
            dets = dets.reshape(0, 6)
        if dets.ndim != 2 or dets.shape[1] < 4:
            raise ValueError(f"detections must be (n, >=4), got {dets.shape}")
        boxes = check_boxes(dets[:, :4])
        confs = dets[:, 4] if dets.shape[1] > 4 else np.ones(len(dets))
        classes = dets[:, 5].astype(int) if dets.shape[1] > 5 else np.zeros(len(dets), int)

        for _ in range(elapsed):
            for track in self._tracks:
                track.predict()

        track_boxes = np.array([t.box for t in self._tracks]).reshape(-1, 4)
        matches, _, unmatched_d = associate(track_boxes, boxes, self.iou_threshold)
        for t_idx, d_idx in matches:
            self._tracks[t_idx].update(boxes[d_idx], confs[d_idx], classes[d_idx])
        for d_idx in unmatched_d:
            self._tracks.append(
                KalmanTrack(self._next_id, boxes[d_idx], confs[d_idx], classes[d_idx],
                            self.process_noise, self.measurement_noise)
            )
            self._next_id += 1

        self._tracks = [t for t in self._tracks if t.time_since_update <= self.max_age]

        rows = []
        for track in self._tracks:
            if track.time_since_update != 0:
                continue
            if track.hits >= self.min_hits or self._frames_seen <= self.min_hits:
                x, y, w, h = track.box
                rows.append(
                    [frame, track.id, x, y, w, h, track.conf, track.class_id, 1.0]
                )
        return np.asarray(rows, dtype=float).reshape(-1, 9)

    def transform(self, X):
        """Track a whole detection table in one call.

        X is an (n, 9) MOT table (the id column is ignored).  The
        tracker is reset, every frame between the table's first and
        last frame is stepped in order, and the concatenated track rows
        are returned as an (m, 9) array.
        """
        table = check_track_table(X, "detections")
        self.reset()
        if table.shape[0] == 0:
            return np.zeros((0, 9))
        frames = table[:, 0].astype(int)
        by_frame = {}
        for row, f in zip(table, frames):
            by_frame.setdefault(f, []).append(row)
        out = []
        for f in range(frames.min(), frames.max() + 1):
            rows = by_frame.get(f)
            dets = (
                np.asarray(rows)[:, [2, 3, 4, 5, 6, 7]]
                if rows
                else np.zeros((0, 6))
            )
            out.append(self.step(f, dets))
        return np.concatenate(out, axis=0)

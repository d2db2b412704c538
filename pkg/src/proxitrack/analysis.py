"""Social-distancing analysis over tracked pedestrian trajectories.

Works on MOT-style track tables.  Each tracked box is reduced to its
bottom point (the ground-contact proxy), per-frame velocities are
estimated from bottom-point displacements with optional exponential
smoothing, and every frame is scanned for id pairs closer than the
distance threshold.  Candidate pairs are then filtered by the group
validator: pairs that keep a steady proxemic relationship over their
shared history are treated as one social group and removed.  Surviving
pair-frames aggregate into violation events.
"""

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .validation import check_box, check_track_table


def bottom_point(box):
    """Midpoint of a box's bottom edge: (x + w/2, y + h)."""
    x, y, w, h = check_box(box)
    return np.array([x + w / 2.0, y + h])


def ewa_velocities(frames, points, alpha=0.5, smoothing=True):
    """Per-sample velocity of one trajectory, px/frame.

    The first sample gets velocity 0.  Raw velocities are displacement
    over elapsed frames; with smoothing on, the second sample keeps its
    raw value and later samples blend alpha * raw + (1 - alpha) * prev.
    """
    frames = np.asarray(frames, dtype=np.int64)
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if frames.shape[0] != points.shape[0]:
        raise ValueError("frames and points lengths differ")
    if (np.diff(frames) <= 0).any():
        raise ValueError("trajectory frames must be strictly increasing")
    k = frames.shape[0]
    v = np.zeros((k, 2))
    if k < 2:
        return v
    raw = np.diff(points, axis=0) / np.diff(frames)[:, None]
    if not smoothing:
        v[1:] = raw
        return v
    v[1] = raw[0]
    for i in range(2, k):
        v[i] = alpha * raw[i - 1] + (1.0 - alpha) * v[i - 1]
    return v


def find_violation_pairs(ids, points, distance_threshold):
    """All id pairs (i < j) with bottom points closer than the threshold."""
    ids = np.asarray(ids, dtype=np.int64)
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if ids.shape[0] != points.shape[0]:
        raise ValueError("ids and points lengths differ")
    n = ids.shape[0]
    if n < 2:
        return []
    order = np.argsort(ids)
    ids = ids[order]
    points = points[order]
    diff = points[:, None, :] - points[None, :, :]
    d2 = (diff ** 2).sum(axis=2)
    iu, ju = np.triu_indices(n, k=1)
    close = d2[iu, ju] < distance_threshold ** 2
    return [(int(ids[i]), int(ids[j])) for i, j in zip(iu[close], ju[close])]


def cosine_distance(v1, v2):
    """1 - cos(angle between v1 and v2); both vectors must be nonzero."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    n1 = np.linalg.norm(v1)
    n2 = np.linalg.norm(v2)
    if n1 == 0.0 or n2 == 0.0:
        raise ValueError("cosine distance is undefined for zero vectors")
    return float(1.0 - np.dot(v1, v2) / (n1 * n2))


def magnitude_distance(v1, v2):
    """Absolute speed difference over the larger speed, in [0, 1]."""
    n1 = float(np.linalg.norm(np.asarray(v1, dtype=float)))
    n2 = float(np.linalg.norm(np.asarray(v2, dtype=float)))
    m = max(n1, n2)
    if m == 0.0:
        raise ValueError("magnitude distance is undefined for two zero vectors")
    return abs(n1 - n2) / m


def velocity_distance(v1, v2, gamma=0.1):
    """Blend of direction and speed dissimilarity.

    gamma * cosine_distance + (1 - gamma) * magnitude_distance, with
    the degenerate cases made total: two zero velocities compare as
    identical (0), and against exactly one zero velocity the direction
    term is dropped, leaving (1 - gamma) * 1.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    n1 = float(np.linalg.norm(np.asarray(v1, dtype=float)))
    n2 = float(np.linalg.norm(np.asarray(v2, dtype=float)))
    if n1 == 0.0 and n2 == 0.0:
        return 0.0
    if n1 == 0.0 or n2 == 0.0:
        return (1.0 - gamma) * 1.0
    return gamma * cosine_distance(v1, v2) + (1.0 - gamma) * magnitude_distance(v1, v2)


def _common_frames(traj_a, traj_b):
    frames_a, points_a = traj_a
    frames_b, points_b = traj_b
    frames_a = np.asarray(frames_a, dtype=np.int64)
    frames_b = np.asarray(frames_b, dtype=np.int64)
    common, ia, ib = np.intersect1d(
        frames_a, frames_b, assume_unique=True, return_indices=True
    )
    pa = np.asarray(points_a, dtype=float).reshape(-1, 2)[ia]
    pb = np.asarray(points_b, dtype=float).reshape(-1, 2)[ib]
    return common, np.linalg.norm(pa - pb, axis=1)


def trajectory_similarity(traj_a, traj_b):
    """Mean distance between two trajectories over their shared frames.

    Each trajectory is a (frames, points) pair with strictly increasing
    frames and (k, 2) bottom points.
    """
    _, dists = _common_frames(traj_a, traj_b)
    if dists.shape[0] == 0:
        raise ValueError("trajectories share no frames")
    return float(dists.mean())


def trajectory_stability(traj_a, traj_b):
    """Spread of the pairwise distance relative to its mean.

    Population standard deviation of the per-frame distances divided by
    their mean; 0 when the mean is 0 (identical trajectories are
    maximally stable).  Requires at least two shared frames.
    """
    _, dists = _common_frames(traj_a, traj_b)
    if dists.shape[0] < 2:
        raise ValueError("stability needs at least two shared frames")
    mean = float(dists.mean())
    if mean == 0.0:
        return 0.0
    return float(dists.std()) / mean


def trajectory_compare(traj_a, traj_b, distance_threshold=35.0,
                       stability_threshold=0.25):
    """True when two trajectories look like one social group.

    OR filter: the mean shared-frame distance is within the distance
    threshold, or the distance stays steady (stability within its
    threshold).  Degenerate inputs (no shared history) compare False.
    """
    common, dists = _common_frames(traj_a, traj_b)
    if dists.shape[0] == 0:
        return False
    mean = float(dists.mean())
    if mean <= distance_threshold:
        return True
    if dists.shape[0] >= 2:
        return float(dists.std()) / mean <= stability_threshold
    return False


def velocity_compare(v1, v2, gamma=0.1, velocity_threshold=0.21):
    """True when the velocity distance is within the threshold."""
    return velocity_distance(v1, v2, gamma) <= velocity_threshold


@dataclass
class ViolationEvent:
    """A contiguous run of frames where an id pair stays too close."""

    id_a: int
    id_b: int
    start_frame: int
    end_frame: int
    duration_seconds: float

    @property
    def pair(self):
        return (self.id_a, self.id_b)

    def to_dict(self):
        return {
            "pair": [self.id_a, self.id_b],
            "start_frame": self.start_frame,
            "end_frame": self.end_frame,
            "duration_s": self.duration_seconds,
        }


def aggregate_events(pairs_by_frame, fps=15.0, min_event_seconds=1.0,
                     merge_gap_frames=0):
    """Merge per-frame pair hits into events and drop sub-threshold ones.

    Runs of frames for the same pair merge while gaps stay within
    merge_gap_frames.  Duration is (end - start + 1) / fps; events
    strictly shorter than min_event_seconds are dropped.
    """
    if fps <= 0:
        raise ValueError(f"fps must be positive, got {fps}")
    occurrences = {}
    for frame in sorted(pairs_by_frame):
        for a, b in pairs_by_frame[frame]:
            key = (int(min(a, b)), int(max(a, b)))
            occurrences.setdefault(key, []).append(int(frame))
    events = []
    for (a, b), frames in sorted(occurrences.items()):
        start = prev = frames[0]
        for f in frames[1:]:
            if f - prev > merge_gap_frames + 1:
                events.append((a, b, start, prev))
                start = f
            prev = f
        events.append((a, b, start, prev))
    out = []
    for a, b, start, end in events:
        duration = (end - start + 1) / fps
        if duration >= min_event_seconds:
            out.append(ViolationEvent(a, b, start, end, duration))
    out.sort(key=lambda e: (e.start_frame, e.id_a, e.id_b))
    return out


def estimate_volume(trajectory_count, avg_gt_seconds, avg_inferred_seconds,
                    invert_ratio=False):
    """Correct a trajectory count for fragmentation by duration ratio.

    The plain form multiplies the count by avg_gt_seconds /
    avg_inferred_seconds; invert_ratio applies the reciprocal ratio
    instead (shrinking the estimate when fragmentation shortens the
    inferred trajectories).
    """
    if trajectory_count <= 0:
        raise ValueError(f"trajectory count must be positive, got {trajectory_count}")
    if avg_gt_seconds <= 0 or avg_inferred_seconds <= 0:
        raise ValueError("average trajectory lengths must be positive")
    if invert_ratio:
        return trajectory_count * avg_inferred_seconds / avg_gt_seconds
    return trajectory_count * avg_gt_seconds / avg_inferred_seconds


def index_tracks(tracks):
    """Index a track table by id and by frame.

    Returns (per_id, per_frame): per_id maps id -> (frames, bottom
    points) with frames strictly increasing; per_frame maps frame ->
    (ids, bottom points) with ids sorted.
    """
    table = check_track_table(tracks)
    per_id_rows = {}
    seen = set()
    for row in table:
        f, tid = int(row[0]), int(row[1])
        if (f, tid) in seen:
            raise ValueError(f"duplicate id {tid} in frame {f}")
        seen.add((f, tid))
        bp = (row[2] + row[4] / 2.0, row[3] + row[5])
        per_id_rows.setdefault(tid, []).append((f, bp))
    per_id = {}
    per_frame_rows = {}
    for tid, rows in per_id_rows.items():
        rows.sort()
        frames = np.array([f for f, _ in rows], dtype=np.int64)
        points = np.array([bp for _, bp in rows], dtype=float)
        per_id[tid] = (frames, points)
        for (f, bp) in rows:
            per_frame_rows.setdefault(f, []).append((tid, bp))
    per_frame = {}
    for f, rows in per_frame_rows.items():
        rows.sort()
        ids = np.array([tid for tid, _ in rows], dtype=np.int64)
        points = np.array([bp for _, bp in rows], dtype=float)
        per_frame[f] = (ids, points)
    return per_id, per_frame


class _PairHistory:
    """Shared-frame distances of one id pair, with prefix sums."""

    __slots__ = ("frames", "cum_d", "cum_d2")

    def __init__(self, traj_a, traj_b):
        self.frames, dists = _common_frames(traj_a, traj_b)
        self.cum_d = np.concatenate([[0.0], np.cumsum(dists)])
        self.cum_d2 = np.concatenate([[0.0], np.cumsum(dists ** 2)])

    def compare_up_to(self, frame, window, distance_threshold, stability_threshold):
        hi = int(np.searchsorted(self.frames, frame, side="right"))
        lo = 0
        if window > 0:
            lo = int(np.searchsorted(self.frames, frame - window + 1, side="left"))
        count = hi - lo
        if count == 0:
            return False
        mean = (self.cum_d[hi] - self.cum_d[lo]) / count
        if mean <= distance_threshold:
            return True
        if count >= 2:
            var = max(0.0, (self.cum_d2[hi] - self.cum_d2[lo]) / count - mean * mean)
            return math.sqrt(var) / mean <= stability_threshold
        return False


class ViolationAnalyzer(BaseEstimator):
    """Distance scan, group validation and event aggregation in one place.

    Parameters
    ----------
    distance_threshold : float, default 35.0
        Pixel distance under which a pair is a violation candidate (and
        the trajectory-similarity acceptance bound for grouping).
    gamma : float, default 0.1
        Direction weight inside the velocity distance.
    velocity_threshold : float, default 0.21
        Acceptance bound on the velocity distance.
    stability_threshold : float, default 0.25
        Acceptance bound on distance spread over mean distance.
    ewa_alpha : float, default 0.5
        Exponential smoothing weight for velocity estimation.
    use_ewa : bool, default True
        Smooth velocities; raw frame differences otherwise.
    use_velocity_compare : bool, default False
        Restore the full cascade (velocity AND trajectory agreement
        required to drop a pair).  Off by default: the velocity test
        rejects noisy true groups and accepts head-on walkers, so the
        trajectory test alone performs better.
    min_event_seconds : float, default 1.0
        Events shorter than this are discarded.
    fps : float, default 15.0
    merge_gap_frames : int, default 0
        Frame gaps up to this size merge into one event.
    compare_window : int, default 0
        Limit trajectory comparison to this many trailing frames
        (0 = full shared history up to the current frame).
    """

    def __init__(self, distance_threshold=35.0, gamma=0.1, velocity_threshold=0.21,
                 stability_threshold=0.25, ewa_alpha=0.5, use_ewa=True,
                 use_velocity_compare=False, min_event_seconds=1.0, fps=15.0,
                 merge_gap_frames=0, compare_window=0):
        self.distance_threshold = distance_threshold
        self.gamma = gamma
        self.velocity_threshold = velocity_threshold
        self.stability_threshold = stability_threshold
        self.ewa_alpha = ewa_alpha
        self.use_ewa = use_ewa
        self.use_velocity_compare = use_velocity_compare
        self.min_event_seconds = min_event_seconds
        self.fps = fps
        self.merge_gap_frames = merge_gap_frames
        self.compare_window = compare_window

    def fit(self, X=None, y=None):
        return self

    def candidate_pairs(self, tracks):
        """Per-frame id pairs closer than the distance threshold."""
        _, per_frame = index_tracks(tracks)
        out = {}
        for frame in sorted(per_frame):
            ids, points = per_frame[frame]
            pairs = find_violation_pairs(ids, points, self.distance_threshold)
            if pairs:
                out[frame] = pairs
        return out

    def _velocities(self, per_id):
        return {
            tid: ewa_velocities(frames, points, self.ewa_alpha, self.use_ewa)
            for tid, (frames, points) in per_id.items()
        }

    def validate_pairs(self, tracks, pairs_by_frame=None):
        """Split candidate pairs into (kept, removed) per frame.

        A pair is removed (judged same-group) when its trajectories
        compare as a group; with use_velocity_compare on, the velocity
        comparison must pass first.
        """
        per_id, per_frame = index_tracks(tracks)
        if pairs_by_frame is None:
            pairs_by_frame = {
                frame: find_violation_pairs(ids, points, self.distance_threshold)
                for frame, (ids, points) in per_frame.items()
            }
        velocities = self._velocities(per_id) if self.use_velocity_compare else None
        histories = {}
        kept, removed = {}, {}
        for frame in sorted(pairs_by_frame):
            for a, b in pairs_by_frame[frame]:
                key = (int(min(a, b)), int(max(a, b)))
                if key[0] not in per_id or key[1] not in per_id:
                    raise ValueError(f"pair {key} references an unknown track id")
                same_group = True
                if self.use_velocity_compare:
                    same_group = velocity_compare(
                        self._velocity_at(per_id, velocities, key[0], frame),
                        self._velocity_at(per_id, velocities, key[1], frame),
                        self.gamma,
                        self.velocity_threshold,
                    )
                if same_group:
                    hist = histories.get(key)
                    if hist is None:
                        hist = _PairHistory(per_id[key[0]], per_id[key[1]])
                        histories[key] = hist
                    same_group = hist.compare_up_to(
                        frame,
                        self.compare_window,
                        self.distance_threshold,
                        self.stability_threshold,
                    )
                (removed if same_group else kept).setdefault(frame, []).append(key)
        return kept, removed

    @staticmethod
    def _velocity_at(per_id, velocities, tid, frame):
        frames, _ = per_id[tid]
        idx = int(np.searchsorted(frames, frame))
        if idx >= frames.shape[0] or frames[idx] != frame:
            raise ValueError(f"track {tid} has no state in frame {frame}")
        return velocities[tid][idx]

    def events(self, tracks):
        """Validated violation events for a track table."""
        kept, _ = self.validate_pairs(tracks)
        return aggregate_events(
            kept, self.fps, self.min_event_seconds, self.merge_gap_frames
        )

    def transform(self, X):
        return self.events(X)

    def event_mean_velocities(self, tracks, events):
        """Per-event mean velocity vector of each participant.

        Velocities are averaged over the participant's samples inside
        the event's frame span; used for face-to-face classification.
        """
        per_id, _ = index_tracks(tracks)
        velocities = self._velocities(per_id)
        out = []
        for event in events:
            pair_means = []
            for tid in event.pair:
                frames, _ = per_id[tid]
                lo = int(np.searchsorted(frames, event.start_frame, side="left"))
                hi = int(np.searchsorted(frames, event.end_frame, side="right"))
                segment = velocities[tid][lo:hi]
                pair_means.append(
                    segment.mean(axis=0) if segment.shape[0] else np.zeros(2)
                )
            out.append((pair_means[0], pair_means[1]))
        return out


def trajectory_stats(tracks, fps=15.0):
    """(trajectory count, mean trajectory duration in seconds)."""
    if fps <= 0:
        raise ValueError(f"fps must be positive, got {fps}")
    table = check_track_table(tracks)
    if table.shape[0] == 0:
        return 0, 0.0
    spans = {}
    for row in table:
        f, tid = int(row[0]), int(row[1])
        lo, hi = spans.get(tid, (f, f))
        spans[tid] = (min(lo, f), max(hi, f))
    durations = [(hi - lo + 1) / fps for lo, hi in spans.values()]
    return len(spans), float(np.mean(durations))

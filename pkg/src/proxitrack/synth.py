"""Deterministic synthetic crossing scenes with exact ground truth.

Pedestrians walk straight (or gently curved) paths that fit inside the
arena for the whole clip; social groups share one path with fixed
lateral offsets, so members hold their spacing exactly.  Ground truth
(tracks, group membership, true violation intervals) is extracted from
the noiseless geometry before detector-style noise is applied, which
makes every downstream stage checkable against known answers.

All randomness flows through the seeded SplitMix64 stream, so a config
reproduces byte-identical output anywhere.
"""

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .rng import SplitMix64
from .validation import check_track_table

_MIN_SPEED = 0.05  # px/frame floor so nobody is exactly stationary


@dataclass
class ScenarioConfig:
    arena_width: float = 800.0
    arena_height: float = 600.0
    fps: float = 15.0
    duration_frames: int = 300
    pedestrian_count: int = 10
    group_count: int = 0
    group_size_min: int = 2
    group_size_max: int = 4
    group_offset: float = 20.0
    speed_mean: float = 1.2
    speed_std: float = 0.3
    curvature: float = 0.0  # max |turn rate|, radians per frame
    opposing_flows: bool = False  # alternate walking direction per unit
    jitter_sigma: float = 0.0
    miss_rate: float = 0.0
    false_positive_rate: float = 0.0
    id_switch_rate: float = 0.0
    seed: int = 1
    ped_width: float = 15.0
    ped_height: float = 30.0
    distance_threshold: float = 35.0

    def validate(self):
        if self.arena_width <= 0 or self.arena_height <= 0:
            raise ValueError("arena dimensions must be positive")
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if self.duration_frames < 1:
            raise ValueError("duration must be at least one frame")
        if self.pedestrian_count < 0:
            raise ValueError("pedestrian count must be >= 0")
        if not 2 <= self.group_size_min <= self.group_size_max <= 4:
            raise ValueError("group sizes must satisfy 2 <= min <= max <= 4")
        for name in ("jitter_sigma", "group_offset", "speed_std", "curvature"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("miss_rate", "false_positive_rate", "id_switch_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {rate}")
        if self.group_count * self.group_size_min > self.pedestrian_count:
            raise ValueError(
                f"infeasible: {self.group_count} groups of >= {self.group_size_min} "
                f"exceed {self.pedestrian_count} pedestrians"
            )


@dataclass
class ScenarioGroundTruth:
    """Noiseless truth: tracks, group membership, true violation intervals."""

    tracks: np.ndarray  # (n, 9) MOT rows
    groups: list = field(default_factory=list)  # list of id lists
    violation_intervals: list = field(default_factory=list)  # (i, j, start, end)

    def membership(self):
        return {tid: g for g, ids in enumerate(self.groups) for tid in ids}

    def to_dict(self):
        return {
            "groups": [[int(i) for i in ids] for ids in self.groups],
            "violation_intervals": [
                [int(a), int(b), int(s), int(e)]
                for a, b, s, e in self.violation_intervals
            ],
        }


def _unit_path(rng, cfg, unit_index, edge_margin):
    """Bottom-point path of one walking unit, (T, 2) positions + headings."""
    t = np.arange(cfg.duration_frames, dtype=float)
    speed = max(_MIN_SPEED, rng.normal(cfg.speed_mean, cfg.speed_std))
    if cfg.opposing_flows:
        theta = 0.0 if unit_index % 2 == 0 else math.pi
    else:
        theta = rng.uniform(0.0, 2.0 * math.pi)
    omega = rng.uniform(-cfg.curvature, cfg.curvature) if cfg.curvature > 0 else 0.0

    for _ in range(8):  # shrink the speed until the path fits the arena
        headings = theta + omega * t
        steps = np.stack([np.cos(headings), np.sin(headings)], axis=1) * speed
        path = np.concatenate([[(0.0, 0.0)], np.cumsum(steps[:-1], axis=0)])
        half = (path.max(axis=0) - path.min(axis=0)) / 2.0
        room_x = cfg.arena_width / 2.0 - edge_margin
        room_y = cfg.arena_height / 2.0 - edge_margin
        if room_x <= 0 or room_y <= 0:
            raise ValueError("arena too small for the configured pedestrians")
        if half[0] <= room_x and half[1] <= room_y:
            break
        scale = 0.9 * min(
            room_x / half[0] if half[0] > 0 else math.inf,
            room_y / half[1] if half[1] > 0 else math.inf,
        )
        speed = max(_MIN_SPEED, speed * min(scale, 0.9))
    else:
        raise ValueError("could not fit a path inside the arena")

    path -= (path.max(axis=0) + path.min(axis=0)) / 2.0
    center = np.array(
        [
            rng.uniform(edge_margin + half[0], cfg.arena_width - edge_margin - half[0]),
            rng.uniform(edge_margin + half[1], cfg.arena_height - edge_margin - half[1]),
        ]
    )
    return path + center, headings


def _boxes_from_points(points, cfg):
    """Bottom points -> (x, y, w, h) boxes of the configured pedestrian size."""
    boxes = np.empty((points.shape[0], 4))
    boxes[:, 0] = points[:, 0] - cfg.ped_width / 2.0
    boxes[:, 1] = points[:, 1] - cfg.ped_height
    boxes[:, 2] = cfg.ped_width
    boxes[:, 3] = cfg.ped_height
    return boxes


def _interval_runs(frames):
    """Split a sorted frame array into maximal consecutive runs."""
    runs = []
    if frames.size == 0:
        return runs
    start = prev = int(frames[0])
    for f in frames[1:]:
        f = int(f)
        if f != prev + 1:
            runs.append((start, prev))
            start = f
        prev = f
    runs.append((start, prev))
    return runs


def generate(cfg):
    """Build one scenario.

    Returns (detections, ScenarioGroundTruth); detections are (n, 9)
    MOT rows with id -1, frames numbered from 1.  Noise (jitter, misses,
    spurious boxes) is applied only after the truth is extracted, so
    zero noise rates reproduce the ground-truth boxes exactly.
    """
    cfg.validate()
    rng = SplitMix64(cfg.seed)

    sizes = [rng.randint(cfg.group_size_min, cfg.group_size_max)
             for _ in range(cfg.group_count)]
    if sum(sizes) > cfg.pedestrian_count:
        raise ValueError(
            f"infeasible: group members ({sum(sizes)}) exceed "
            f"pedestrian count ({cfg.pedestrian_count})"
        )
    units = [("group", size) for size in sizes]
    units += [("single", 1)] * (cfg.pedestrian_count - sum(sizes))

    max_offset = (
        max((s - 1) / 2.0 for _, s in units) * cfg.group_offset if units else 0.0
    )
    # the box spans ped_width/2 sideways and ped_height above the
    # bottom point, so this margin keeps whole boxes inside the arena
    edge_margin = max_offset + max(cfg.ped_width, cfg.ped_height)

    positions = {}  # id -> (T, 2) bottom points
    groups = []
    next_id = 1
    for unit_index, (kind, size) in enumerate(units):
        path, headings = _unit_path(rng, cfg, unit_index, edge_margin)
        normals = np.stack([-np.sin(headings), np.cos(headings)], axis=1)
        member_ids = []
        for member in range(size):
            offset = (member - (size - 1) / 2.0) * cfg.group_offset
            positions[next_id] = path + offset * normals
            member_ids.append(next_id)
            next_id += 1
        if kind == "group":
            groups.append(member_ids)

    ids = sorted(positions)
    frames = np.arange(1, cfg.duration_frames + 1)

    gt_rows = []
    for t in range(cfg.duration_frames):
        for tid in ids:
            bx, by = positions[tid][t]
            gt_rows.append(
                [frames[t], tid, bx - cfg.ped_width / 2.0, by - cfg.ped_height,
                 cfg.ped_width, cfg.ped_height, 1.0, 0, 1.0]
            )
    gt_tracks = np.asarray(gt_rows, dtype=float).reshape(-1, 9)

    member_of = {tid: g for g, ids_ in enumerate(groups) for tid in ids_}
    intervals = []
    for a_pos, a in enumerate(ids):
        for b in ids[a_pos + 1 :]:
            if member_of.get(a) is not None and member_of.get(a) == member_of.get(b):
                continue
            dist = np.linalg.norm(positions[a] - positions[b], axis=1)
            close = frames[dist < cfg.distance_threshold]
            for start, end in _interval_runs(close):
                intervals.append((a, b, start, end))
    intervals.sort(key=lambda iv: (iv[2], iv[0], iv[1]))

    det_rows = []
    for t in range(cfg.duration_frames):
        for tid in ids:
            if cfg.miss_rate > 0 and rng.random() < cfg.miss_rate:
                continue
            bx, by = positions[tid][t]
            x = bx - cfg.ped_width / 2.0
            y = by - cfg.ped_height
            if cfg.jitter_sigma > 0:
                x += rng.normal(0.0, cfg.jitter_sigma)
                y += rng.normal(0.0, cfg.jitter_sigma)
            det_rows.append(
                [frames[t], -1, x, y, cfg.ped_width, cfg.ped_height, 1.0, 0, 1.0]
            )
        if cfg.false_positive_rate > 0 and rng.random() < cfg.false_positive_rate:
            fx = rng.uniform(cfg.ped_width, cfg.arena_width - cfg.ped_width)
            fy = rng.uniform(cfg.ped_height, cfg.arena_height)
            det_rows.append(
                [frames[t], -1, fx - cfg.ped_width / 2.0, fy - cfg.ped_height,
                 cfg.ped_width, cfg.ped_height, 0.5, 0, 1.0]
            )
    detections = np.asarray(det_rows, dtype=float).reshape(-1, 9)

    truth = ScenarioGroundTruth(
        tracks=gt_tracks, groups=groups, violation_intervals=intervals
    )
    return detections, truth


def inject_id_switches(tracks, rate, seed=1):
    """Fragment track identities: split an id into two at a random frame.

    Each distinct id is split with probability `rate`; fresh ids start
    above the current maximum.  Used to emulate tracker id churn when
    probing the volume-correction arithmetic.
    """
    table = check_track_table(tracks)
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must lie in [0, 1], got {rate}")
    if table.shape[0] == 0:
        return table.copy()
    rng = SplitMix64(seed)
    out = table.copy()
    ids = sorted({int(i) for i in table[:, 1]})
    next_id = max(ids) + 1
    for tid in ids:
        if rng.random() >= rate:
            continue
        mask = out[:, 1] == tid
        rows = np.nonzero(mask)[0]
        frames_of = out[rows, 0]
        order = np.argsort(frames_of, kind="stable")
        if order.shape[0] < 2:
            continue
        split = rng.randint(1, order.shape[0] - 1)
        out[rows[order[split:]], 1] = next_id
        next_id += 1
    return out


def perturb_tracks(tracks, sigma, seed=1):
    """Add Gaussian position noise to track boxes, keeping ids.

    Emulates detector localization error on an id-true track table, so
    analysis stages can be stressed without re-identifying tracks.
    """
    table = check_track_table(tracks)
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    rng = SplitMix64(seed)
    out = table.copy()
    order = np.lexsort((table[:, 1], table[:, 0]))
    for idx in order:
        out[idx, 2] += rng.normal(0.0, sigma)
        out[idx, 3] += rng.normal(0.0, sigma)
    return out


def scenario_config_to_dict(cfg):
    return asdict(cfg)

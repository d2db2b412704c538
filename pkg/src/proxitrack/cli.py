"""Command-line pipeline: preprocess, track, analyze, synth, eval.

Every command reads a flat `key = value` config file, writes data to
files under `output_dir`, sends diagnostics to stderr and exits 0 only
on success.  Outputs are byte-deterministic for a fixed config.
"""

import argparse
import glob
import os
import re
import sys
from collections import deque
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import pnm
from .analysis import ViolationAnalyzer, estimate_volume, trajectory_stats
from .config import Config
from .evaluation import evaluate_mot
from .io import (read_json, read_mot_csv, write_csv, write_events_jsonl,
                 write_json, write_mot_csv)
from .preprocess import (PlaneCalibration, center_crop, estimate_homography,
                         subtract_background, warp_box, warp_frame)
from .stats import (angle_between, duration_histogram, face_to_face_fraction,
                    group_validation_metrics, kde, per_slot_rates,
                    violation_percentage)
from .synth import ScenarioConfig, generate, inject_id_switches
from .tracker import SortTracker


def _require(cfg, key):
    value = cfg.get_str(key)
    if value is None:
        raise ValueError(f"config key {key!r} is required")
    return value


def _output_dir(cfg):
    out = _require(cfg, "output_dir")
    os.makedirs(out, exist_ok=True)
    return out


def _homography_from_config(cfg):
    """Optional calibration: a 9-number matrix or >= 4 correspondences."""
    if cfg.has("homography"):
        numbers = cfg.get_floats("homography")
        if len(numbers) != 9:
            raise ValueError(
                f"config key 'homography' needs 9 numbers, got {len(numbers)}"
            )
        return PlaneCalibration.from_matrix(np.asarray(numbers).reshape(3, 3))
    if cfg.has("correspondences"):
        quads = []
        for part in cfg.get_str("correspondences").split(";"):
            part = part.strip()
            if not part:
                continue
            vals = [float(p) for p in part.split()]
            if len(vals) != 4:
                raise ValueError(
                    "each correspondence needs 4 numbers: img_x img_y world_x world_y"
                )
            quads.append(vals)
        quads = np.asarray(quads)
        matrix = estimate_homography(quads[:, :2], quads[:, 2:])
        return PlaneCalibration.from_matrix(matrix)
    return None


def _analyzer_from_config(cfg):
    return ViolationAnalyzer(
        distance_threshold=cfg.get_float("distance_threshold", 35.0),
        gamma=cfg.get_float("gamma", 0.1),
        velocity_threshold=cfg.get_float("velocity_threshold", 0.21),
        stability_threshold=cfg.get_float("stability_threshold", 0.25),
        ewa_alpha=cfg.get_float("ewa_alpha", 0.5),
        use_ewa=cfg.get_bool("use_ewa", True),
        use_velocity_compare=cfg.get_bool("use_velocity_compare", False),
        min_event_seconds=cfg.get_float("min_event_seconds", 1.0),
        fps=_fps(cfg),
        merge_gap_frames=cfg.get_int("merge_gap_frames", 0),
        compare_window=cfg.get_int("compare_window", 0),
    )


def _tracker_from_config(cfg):
    return SortTracker(
        iou_threshold=cfg.get_float("iou_threshold", 0.3),
        max_age=cfg.get_int("max_age", 1),
        min_hits=cfg.get_int("min_hits", 3),
        process_noise=cfg.get_float("process_noise", 1.0),
        measurement_noise=cfg.get_float("measurement_noise", 1.0),
    )


def _fps(cfg):
    fps = cfg.get_float("fps", 15.0)
    if fps <= 0:
        raise ValueError(f"fps must be positive, got {fps}")
    return fps


def _scenario_from_config(cfg):
    arena = cfg.get_floats("arena", [800.0, 600.0])
    if len(arena) != 2:
        raise ValueError("config key 'arena' needs two numbers: width height")
    return ScenarioConfig(
        arena_width=arena[0],
        arena_height=arena[1],
        fps=_fps(cfg),
        duration_frames=cfg.get_int("duration_frames", 300),
        pedestrian_count=cfg.get_int("pedestrian_count", 10),
        group_count=cfg.get_int("group_count", 0),
        group_size_min=cfg.get_int("group_size_min", 2),
        group_size_max=cfg.get_int("group_size_max", 4),
        group_offset=cfg.get_float("group_offset", 20.0),
        speed_mean=cfg.get_float("speed_mean", 1.2),
        speed_std=cfg.get_float("speed_std", 0.3),
        curvature=cfg.get_float("curvature", 0.0),
        opposing_flows=cfg.get_bool("opposing_flows", False),
        jitter_sigma=cfg.get_float("jitter_sigma", 0.0),
        miss_rate=cfg.get_float("miss_rate", 0.0),
        false_positive_rate=cfg.get_float("false_positive_rate", 0.0),
        id_switch_rate=cfg.get_float("id_switch_rate", 0.0),
        seed=cfg.get_int("seed", 1),
        ped_width=cfg.get_float("ped_width", 15.0),
        ped_height=cfg.get_float("ped_height", 30.0),
        distance_threshold=cfg.get_float("distance_threshold", 35.0),
    )


_FRAME_NUMBER = re.compile(r"(\d+)")


def _list_images(images_dir):
    paths = sorted(
        glob.glob(os.path.join(images_dir, "*.pgm"))
        + glob.glob(os.path.join(images_dir, "*.ppm"))
    )
    if not paths:
        raise ValueError(f"no .pgm/.ppm files found in {images_dir}")

    def frame_key(path):
        digits = _FRAME_NUMBER.findall(os.path.basename(path))
        return (int(digits[-1]) if digits else 0, path)

    return sorted(paths, key=frame_key)


def cmd_preprocess(cfg, args):
    """Background subtraction, plane warp and crop, in that order."""
    images_dir = _require(cfg, "images_dir")
    out_dir = _output_dir(cfg)
    alpha = cfg.get_float("alpha", 0.5)
    window = cfg.get_int("background_window", 0)
    interpolation = cfg.get_str("interpolation", "bilinear")
    calibration = _homography_from_config(cfg)
    warp_size = cfg.get_floats("warp_size")
    crop = cfg.get_floats("crop")
    if crop is not None and len(crop) != 4:
        raise ValueError("config key 'crop' needs four numbers: x y w h")

    paths = _list_images(images_dir)
    frames = [pnm.read_pnm(p) for p in paths]

    if window > 0:
        recent = deque(maxlen=window)
        running = None
        means = []
        for frame in frames:
            if running is None:
                running = np.zeros(frame.shape, dtype=np.float64)
            if len(recent) == window:
                running -= recent[0]
            recent.append(frame.astype(np.float64))
            running += recent[-1]
            means.append(running / len(recent))
    else:
        full_mean = np.mean(np.stack([f.astype(np.float64) for f in frames]), axis=0)
        means = [full_mean] * len(frames)

    out_size = None
    if warp_size is not None:
        if len(warp_size) != 2:
            raise ValueError("config key 'warp_size' needs two numbers: width height")
        out_size = (int(warp_size[0]), int(warp_size[1]))

    for path, frame, mean in zip(paths, frames, means):
        result = subtract_background(frame, mean, alpha)
        if calibration is not None:
            result = warp_frame(calibration.matrix_, result, out_size, interpolation)
        if crop is not None:
            result = center_crop(result, int(crop[0]), int(crop[1]),
                                 int(crop[2]), int(crop[3]))
        pnm.write_pnm(os.path.join(out_dir, os.path.basename(path)), result)
    return 0


def _expand_inputs(pattern, key, exclude_suffixes=()):
    if glob.has_magic(pattern):
        paths = sorted(
            p for p in glob.glob(pattern)
            if not any(p.endswith(s) for s in exclude_suffixes)
        )
        if not paths:
            raise ValueError(f"config key {key!r}: no files match {pattern!r}")
        return paths
    return [pattern]


def _fan_out(paths, worker, jobs):
    if len(paths) == 1 or jobs <= 1:
        for p in paths:
            worker(p)
        return
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        for future in [pool.submit(worker, p) for p in paths]:
            future.result()


def _stem(path):
    return os.path.splitext(os.path.basename(path))[0]


def cmd_track(cfg, args):
    """Assign identities to a detection table."""
    pattern = _require(cfg, "detections")
    out_dir = _output_dir(cfg)
    calibration = _homography_from_config(cfg)
    calibrate = cfg.get_bool("track_calibrated", True) and calibration is not None
    # a glob must not re-match this command's own outputs on a re-run
    paths = _expand_inputs(pattern, "detections", exclude_suffixes=(".tracks.csv",))

    def worker(path):
        detections = read_mot_csv(path)
        if detections.shape[0]:
            frames = detections[:, 0]
            drops = np.nonzero(np.diff(frames) < 0)[0]
            if drops.size:
                k = int(drops[0]) + 1
                raise ValueError(
                    f"{path}: out-of-order frame {int(frames[k])} at row {k + 1}"
                )
            if calibrate:
                detections = detections.copy()
                for row in detections:
                    row[2:6] = warp_box(calibration.matrix_, row[2:6])
        tracks = _tracker_from_config(cfg).transform(detections)
        if len(paths) == 1:
            out_path = cfg.get_str("tracks", os.path.join(out_dir, "tracks.csv"))
        else:
            out_path = os.path.join(out_dir, f"{_stem(path)}.tracks.csv")
        write_mot_csv(out_path, tracks)

    _fan_out(paths, worker, args.jobs)
    return 0


def _analyze_one(cfg, tracks_path, out_dir, prefix=""):
    fps = _fps(cfg)
    tracks = read_mot_csv(tracks_path)
    analyzer = _analyzer_from_config(cfg)
    events = analyzer.events(tracks) if tracks.shape[0] else []

    durations = [e.duration_seconds for e in events]
    hist = duration_histogram(durations)
    duration_curve = None
    if durations:
        duration_curve = kde(durations, cfg.get_float("kde_bandwidth", 0.08))

    angles = []
    if events:
        for va, vb in analyzer.event_mean_velocities(tracks, events):
            if np.linalg.norm(va) > 0 and np.linalg.norm(vb) > 0:
                angles.append(angle_between(va, vb))
    angle_curve = None
    if angles:
        angle_curve = kde(angles, cfg.get_float("angle_bandwidth", 0.08 * 180.0))

    trajectory_count, avg_seconds = trajectory_stats(tracks, fps) \
        if tracks.shape[0] else (0, 0.0)
    avg_gt_seconds = cfg.get_float("avg_trajectory_gt_seconds", 0.0)
    invert = cfg.get_bool("invert_ratio", False)
    if trajectory_count == 0:
        volume, note = 0.0, "no trajectories; volume set to 0"
    elif avg_gt_seconds > 0:
        volume = estimate_volume(trajectory_count, avg_gt_seconds, avg_seconds,
                                 invert_ratio=invert)
        note = ""
    else:
        volume = float(trajectory_count)
        note = "no reference trajectory length configured; volume = trajectory count"

    violators = sorted({tid for e in events for tid in e.pair})
    percentage = violation_percentage(len(violators), volume) if volume > 0 else 0.0

    slot = cfg.get_str("slot_label", "all")
    if tracks.shape[0]:
        minutes = (tracks[:, 0].max() - tracks[:, 0].min() + 1) / fps / 60.0
        rates = per_slot_rates({slot: len(events)}, {slot: minutes})
    else:
        rates = {slot: 0.0}

    def curve_dict(curve):
        if curve is None:
            return None
        return {
            "bandwidth": curve.bandwidth,
            "x": [float(v) for v in curve.grid],
            "density": [float(v) for v in curve.density],
        }

    report = {
        "fps": fps,
        "events": [e.to_dict() for e in events],
        "event_count": len(events),
        "violator_count": len(violators),
        "trajectory_count": trajectory_count,
        "avg_trajectory_seconds": avg_seconds,
        "estimated_volume": volume,
        "volume_note": note,
        "violation_percentage": percentage,
        "face_to_face_fraction": face_to_face_fraction(angles),
        "face_to_face_angle_count": len(angles),
        "per_slot_rates": rates,
        "duration_histogram": [
            {"bin_start": s, "bin_end": e, "count": c} for s, e, c in hist
        ],
        "duration_kde": curve_dict(duration_curve),
        "angle_kde": curve_dict(angle_curve),
    }

    write_events_jsonl(os.path.join(out_dir, f"{prefix}events.jsonl"), events)
    write_json(os.path.join(out_dir, f"{prefix}report.json"), report)
    write_csv(
        os.path.join(out_dir, f"{prefix}duration_histogram.csv"),
        ["bin_start", "bin_end", "count"],
        [(float(s), float(e), int(c)) for s, e, c in hist],
    )
    for name, curve in (("duration_kde", duration_curve), ("angle_kde", angle_curve)):
        rows = []
        if curve is not None:
            rows = list(zip((float(v) for v in curve.grid),
                            (float(v) for v in curve.density)))
        write_csv(os.path.join(out_dir, f"{prefix}{name}.csv"), ["x", "density"], rows)


def cmd_analyze(cfg, args):
    """Violation events plus the statistical report for a track table."""
    out_dir = _output_dir(cfg)
    pattern = cfg.get_str("tracks", os.path.join(out_dir, "tracks.csv"))
    paths = _expand_inputs(
        pattern, "tracks",
        exclude_suffixes=(".duration_histogram.csv", ".duration_kde.csv",
                          ".angle_kde.csv"),
    )

    def worker(path):
        prefix = "" if len(paths) == 1 else f"{_stem(path)}."
        _analyze_one(cfg, path, out_dir, prefix)

    _fan_out(paths, worker, args.jobs)
    return 0


def cmd_synth(cfg, args):
    """Generate a synthetic scene: detections, ground truth, truth JSON."""
    out_dir = _output_dir(cfg)
    scenario = _scenario_from_config(cfg)
    detections, truth = generate(scenario)
    write_mot_csv(os.path.join(out_dir, "detections.csv"), detections)
    write_mot_csv(os.path.join(out_dir, "gt_tracks.csv"), truth.tracks)
    doc = truth.to_dict()
    doc["duration_frames"] = scenario.duration_frames
    doc["fps"] = scenario.fps
    doc["seed"] = scenario.seed
    write_json(os.path.join(out_dir, "scenario.json"), doc)
    if scenario.id_switch_rate > 0:
        switched = inject_id_switches(
            truth.tracks, scenario.id_switch_rate, scenario.seed
        )
        write_mot_csv(os.path.join(out_dir, "switched_tracks.csv"), switched)
    return 0


def cmd_eval_mot(cfg, args):
    """CLEAR metrics of a track table against ground truth."""
    out_dir = _output_dir(cfg)
    gt = read_mot_csv(_require(cfg, "gt_tracks"))
    hyp = read_mot_csv(_require(cfg, "tracks"))
    metrics = evaluate_mot(gt, hyp, cfg.get_float("mot_iou_threshold", 0.5))
    write_json(os.path.join(out_dir, "mot_metrics.json"), metrics.to_dict())
    return 0


def cmd_eval_groups(cfg, args):
    """Precision/recall/F1 of group validation against annotated groups.

    Track ids must live in the same id space as the groups file (use
    ground-truth or id-true perturbed tracks).
    """
    out_dir = _output_dir(cfg)
    tracks = read_mot_csv(_require(cfg, "tracks"))
    gt_path = cfg.get_str("gt_tracks")
    gt_tracks = read_mot_csv(gt_path) if gt_path else tracks
    groups = read_json(_require(cfg, "groups"))["groups"]
    analyzer = _analyzer_from_config(cfg)
    _, removed = analyzer.validate_pairs(tracks)
    metrics = group_validation_metrics(
        removed, gt_tracks, groups, analyzer.distance_threshold
    )
    write_json(os.path.join(out_dir, "group_metrics.json"), metrics.to_dict())
    return 0


_COMMANDS = {
    "preprocess": (cmd_preprocess, "condition image frames (subtract, warp, crop)"),
    "track": (cmd_track, "assign track ids to a detection CSV"),
    "analyze": (cmd_analyze, "detect violations and write the report"),
    "synth": (cmd_synth, "generate a synthetic scene with ground truth"),
    "eval-mot": (cmd_eval_mot, "score tracks with CLEAR metrics"),
    "eval-groups": (cmd_eval_groups, "score group validation against annotations"),
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="proxitrack",
        description="Pedestrian tracking and proximity-violation analytics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="flat key = value config file")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel workers when an input key is a glob")
    args = parser.parse_args(argv)
    try:
        cfg = Config.from_file(args.config)
        return _COMMANDS[args.command][0](cfg, args)
    except Exception as exc:  # noqa: BLE001 - single CLI error boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

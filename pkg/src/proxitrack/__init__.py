"""Pedestrian tracking and proximity-violation analytics for overhead video.

The pieces compose sklearn-style: frame conditioning transformers, a
tracker with a batch `transform` over detection tables, a violation
analyzer, plain metric functions, and a deterministic scene generator
that doubles as the test oracle.
"""

from .analysis import (ViolationAnalyzer, ViolationEvent, aggregate_events,
                       bottom_point, cosine_distance, estimate_volume,
                       ewa_velocities, find_violation_pairs,
                       magnitude_distance, trajectory_compare,
                       trajectory_similarity, trajectory_stability,
                       trajectory_stats, velocity_compare, velocity_distance)
from .assignment import linear_assignment
from .evaluation import MotMetrics, evaluate_mot
from .preprocess import (BackgroundSubtractor, CenterCrop, PlaneCalibration,
                         center_crop, compute_mean_frame, estimate_homography,
                         subtract_background, warp_box, warp_frame, warp_points)
from .stats import (GaussianKde, GroupValidationMetrics, KdeCurve,
                    angle_between, duration_histogram, face_to_face_fraction,
                    group_validation_metrics, kde, per_slot_rates,
                    violation_percentage)
from .synth import (ScenarioConfig, ScenarioGroundTruth, generate,
                    inject_id_switches, perturb_tracks)
from .tracker import SortTracker, associate, iou, iou_matrix

__version__ = "0.1.0"

__all__ = [
    "BackgroundSubtractor",
    "CenterCrop",
    "GaussianKde",
    "GroupValidationMetrics",
    "KdeCurve",
    "MotMetrics",
    "PlaneCalibration",
    "ScenarioConfig",
    "ScenarioGroundTruth",
    "SortTracker",
    "ViolationAnalyzer",
    "ViolationEvent",
    "aggregate_events",
    "angle_between",
    "associate",
    "bottom_point",
    "center_crop",
    "compute_mean_frame",
    "cosine_distance",
    "duration_histogram",
    "estimate_homography",
    "estimate_volume",
    "evaluate_mot",
    "ewa_velocities",
    "face_to_face_fraction",
    "find_violation_pairs",
    "generate",
    "group_validation_metrics",
    "inject_id_switches",
    "iou",
    "iou_matrix",
    "kde",
    "linear_assignment",
    "magnitude_distance",
    "per_slot_rates",
    "perturb_tracks",
    "subtract_background",
    "trajectory_compare",
    "trajectory_similarity",
    "trajectory_stability",
    "trajectory_stats",
    "velocity_compare",
    "velocity_distance",
    "violation_percentage",
    "warp_box",
    "warp_frame",
    "warp_points",
]

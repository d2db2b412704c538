"""Reporting statistics: density curves, angles, rates and group scores."""

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .analysis import find_violation_pairs, index_tracks


@dataclass
class KdeCurve:
    """A sampled density estimate: ordered grid, densities, bandwidth."""

    grid: np.ndarray
    density: np.ndarray
    bandwidth: float

    def integral(self):
        return float(np.trapezoid(self.density, self.grid))


def kde(samples, bandwidth, grid=None, grid_size=512, pad_bandwidths=5.0):
    """Gaussian kernel density estimate over a sample set.

    density(x) = (1 / (n h)) * sum(phi((x - s_i) / h)) with phi the
    standard normal density.  The default grid spans the samples padded
    by pad_bandwidths * h on both sides, so the curve integrates to ~1.
    """
    samples = np.asarray(samples, dtype=float).reshape(-1)
    if samples.shape[0] == 0:
        raise ValueError("kde needs at least one sample")
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    if grid is None:
        lo = samples.min() - pad_bandwidths * bandwidth
        hi = samples.max() + pad_bandwidths * bandwidth
        grid = np.linspace(lo, hi, grid_size)
    else:
        grid = np.asarray(grid, dtype=float).reshape(-1)
    z = (grid[:, None] - samples[None, :]) / bandwidth
    density = np.exp(-0.5 * z ** 2).sum(axis=1) / (
        samples.shape[0] * bandwidth * math.sqrt(2.0 * math.pi)
    )
    return KdeCurve(grid=grid, density=density, bandwidth=float(bandwidth))


class GaussianKde(BaseEstimator):
    """Estimator wrapper around `kde` (fit samples, evaluate densities)."""

    def __init__(self, bandwidth=0.08, grid_size=512, pad_bandwidths=5.0):
        self.bandwidth = bandwidth
        self.grid_size = grid_size
        self.pad_bandwidths = pad_bandwidths

    def fit(self, X, y=None):
        samples = np.asarray(X, dtype=float).reshape(-1)
        if samples.shape[0] == 0:
            raise ValueError("kde needs at least one sample")
        self.samples_ = samples
        return self

    def curve(self, grid=None):
        if not hasattr(self, "samples_"):
            raise ValueError("GaussianKde is not fitted")
        return kde(self.samples_, self.bandwidth, grid,
                   self.grid_size, self.pad_bandwidths)

    def density(self, grid):
        return self.curve(np.asarray(grid, dtype=float)).density


def angle_between(v1, v2):
    """Angle between two nonzero vectors, in degrees within [0, 180]."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    n1 = np.linalg.norm(v1)
    n2 = np.linalg.norm(v2)
    if n1 == 0.0 or n2 == 0.0:
        raise ValueError("angle is undefined for zero vectors")
    cos = np.clip(np.dot(v1, v2) / (n1 * n2), -1.0, 1.0)
    return float(math.degrees(math.acos(cos)))


def face_to_face_fraction(angles, threshold_deg=150.0):
    """Fraction of angles exceeding the head-on threshold."""
    angles = list(angles)
    if not angles:
        return 0.0
    return sum(1 for a in angles if a > threshold_deg) / len(angles)


def per_slot_rates(counts_by_slot, minutes_by_slot):
    """Violations per minute for each recording slot."""
    rates = {}
    for slot, minutes in minutes_by_slot.items():
        if minutes <= 0:
            raise ValueError(f"slot {slot!r} has nonpositive duration")
        rates[slot] = counts_by_slot.get(slot, 0) / minutes
    return rates


def violation_percentage(violator_count, volume):
    """Violators as a percentage of the estimated pedestrian volume."""
    if volume <= 0:
        raise ValueError(f"volume must be positive, got {volume}")
    return 100.0 * violator_count / volume


def duration_histogram(durations, bin_seconds=1.0):
    """Right-open duration bins [k*w, (k+1)*w); returns (start, end, count)."""
    if bin_seconds <= 0:
        raise ValueError(f"bin width must be positive, got {bin_seconds}")
    durations = list(durations)
    if not durations:
        return []
    top = int(math.floor(max(durations) / bin_seconds)) + 1
    counts = [0] * top
    for d in durations:
        counts[int(math.floor(d / bin_seconds))] += 1
    return [
        (k * bin_seconds, (k + 1) * bin_seconds, c) for k, c in enumerate(counts)
    ]


@dataclass
class GroupValidationMetrics:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    precision_defined: bool

    def to_dict(self):
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision_defined": self.precision_defined,
        }


def _normalize_membership(membership):
    """Accept either {id: group} or an iterable of id collections."""
    if isinstance(membership, dict):
        return {int(k): v for k, v in membership.items()}
    mapping = {}
    for g, ids in enumerate(membership):
        for tid in ids:
            if int(tid) in mapping:
                raise ValueError(f"id {tid} belongs to more than one group")
            mapping[int(tid)] = g
    return mapping


def group_validation_metrics(predicted_same_group, gt_tracks, membership,
                             distance_threshold=35.0):
    """Score same-group predictions against annotated group membership.

    The positive class is the set of (frame, i, j) pairs that belong to
    the same annotated group and sit within the distance threshold in
    the ground-truth tracks.  Precision, recall and F1 follow from the
    overlap with the predicted pair set.

    Parameters
    ----------
    predicted_same_group : mapping frame -> iterable of (i, j) pairs the
        validator removed as same-group.
    gt_tracks : (n, 9) ground-truth track table (positions used to test
        the distance threshold).
    membership : {id: group} mapping or iterable of id collections.

    Raises
    ------
    ValueError if the ground truth contains no positive pair (recall is
    undefined).
    """
    groups = _normalize_membership(membership)
    _, per_frame = index_tracks(gt_tracks)
    positives = set()
    for frame, (ids, points) in per_frame.items():
        for a, b in find_violation_pairs(ids, points, distance_threshold):
            if a in groups and b in groups and groups[a] == groups[b]:
                positives.add((int(frame), a, b))
    if not positives:
        raise ValueError("ground truth contains no same-group pair within threshold")
    predicted = set()
    for frame, pairs in predicted_same_group.items():
        for a, b in pairs:
            predicted.add((int(frame), int(min(a, b)), int(max(a, b))))
    tp = len(predicted & positives)
    fp = len(predicted - positives)
    fn = len(positives - predicted)
    precision_defined = (tp + fp) > 0
    precision = tp / (tp + fp) if precision_defined else 0.0
    recall = tp / (tp + fn)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return GroupValidationMetrics(
        precision=precision,
        recall=recall,
        f1=f1,
        tp=tp,
        fp=fp,
        fn=fn,
        precision_defined=precision_defined,
    )

"""CLEAR multi-object tracking metrics.

Per frame, matches persisting from the previous frame are kept while
their overlap stays above the gate; the remainder is matched by
Hungarian assignment on 1 - IoU.  An id switch is counted whenever a
ground-truth identity is matched to a different hypothesis id than its
last known partner.
"""

from dataclasses import dataclass, asdict

import numpy as np

from .assignment import linear_assignment
from .tracker import iou_matrix
from .validation import check_track_table

_FORBIDDEN = 1e9


@dataclass
class MotMetrics:
    mota: float
    motp: float
    mt: float
    ml: float
    fp: int
    fn: int
    idsw: int
    num_gt: int
    num_matches: int

    def to_dict(self):
        return asdict(self)


def _by_frame(table):
    out = {}
    for row in table:
        f = int(row[0])
        out.setdefault(f, []).append((int(row[1]), row[2:6]))
    for f, entries in out.items():
        entries.sort(key=lambda e: e[0])
    return out


def evaluate_mot(gt, hyp, iou_match_threshold=0.5):
    """Score a track hypothesis against ground truth.

    Parameters
    ----------
    gt, hyp : (n, 9) MOT tables (frame, id, x, y, w, h, conf, class, vis).
    iou_match_threshold : float, default 0.5
        Minimum IoU for a ground-truth/hypothesis box match.

    Returns
    -------
    MotMetrics with MOTA = 1 - (FN + FP + IDSW) / num_gt, MOTP as the
    mean IoU over matches, and MT/ML as the fractions of ground-truth
    identities covered in >= 80% / <= 20% of their frames.
    """
    gt = check_track_table(gt, "gt")
    hyp = check_track_table(hyp, "hyp")
    if gt.shape[0] == 0:
        raise ValueError("ground truth is empty")

    gt_frames = _by_frame(gt)
    hyp_frames = _by_frame(hyp)
    frames = sorted(set(gt_frames) | set(hyp_frames))

    last_partner = {}  # gt id -> last matched hyp id
    gt_total = {}  # gt id -> frames present
    gt_covered = {}  # gt id -> frames matched
    fp = fn = idsw = 0
    motp_sum = 0.0
    num_matches = 0

    for f in frames:
        g_entries = gt_frames.get(f, [])
        h_entries = hyp_frames.get(f, [])
        for gid, _ in g_entries:
            gt_total[gid] = gt_total.get(gid, 0) + 1
        g_boxes = np.asarray([b for _, b in g_entries]).reshape(-1, 4)
        h_boxes = np.asarray([b for _, b in h_entries]).reshape(-1, 4)
        overlaps = iou_matrix(g_boxes, h_boxes)

        h_index = {hid: j for j, (hid, _) in enumerate(h_entries)}
        matched_g, matched_h = {}, set()
        # 1. persisting correspondences survive while they still overlap
        for i, (gid, _) in enumerate(g_entries):
            j = h_index.get(last_partner.get(gid))
            if j is not None and j not in matched_h and overlaps[i, j] >= iou_match_threshold:
                matched_g[i] = j
                matched_h.add(j)
        # 2. Hungarian over the remainder
        rem_g = [i for i in range(len(g_entries)) if i not in matched_g]
        rem_h = [j for j in range(len(h_entries)) if j not in matched_h]
        if rem_g and rem_h:
            sub = overlaps[np.ix_(rem_g, rem_h)]
            cost = 1.0 - sub
            cost[sub < iou_match_threshold] = _FORBIDDEN
            for r, c in linear_assignment(cost):
                if sub[r, c] >= iou_match_threshold:
                    matched_g[rem_g[r]] = rem_h[c]
                    matched_h.add(rem_h[c])

        for i, j in sorted(matched_g.items()):
            gid = g_entries[i][0]
            hid = h_entries[j][0]
            prev = last_partner.get(gid)
            if prev is not None and prev != hid:
                idsw += 1
            last_partner[gid] = hid
            gt_covered[gid] = gt_covered.get(gid, 0) + 1
            motp_sum += float(overlaps[i, j])
            num_matches += 1

        fp += len(h_entries) - len(matched_g)
        fn += len(g_entries) - len(matched_g)

    num_gt = gt.shape[0]
    coverage = [gt_covered.get(gid, 0) / total for gid, total in sorted(gt_total.items())]
    mt = sum(1 for c in coverage if c >= 0.8) / len(coverage)
    ml = sum(1 for c in coverage if c <= 0.2) / len(coverage)
    return MotMetrics(
        mota=1.0 - (fn + fp + idsw) / num_gt,
        motp=motp_sum / num_matches if num_matches else 0.0,
        mt=mt,
        ml=ml,
        fp=fp,
        fn=fn,
        idsw=idsw,
        num_gt=num_gt,
        num_matches=num_matches,
    )

"""File interfaces: MOT-style CSV tables, JSON documents, CSV exports.

MOT rows are `frame,id,x,y,w,h,conf,class,visibility` with 1-based
frames and id -1 for raw detections.  Floats are written with the
shortest round-tripping representation so identical data always
produces identical bytes.
"""

import json

import numpy as np

from .validation import check_track_table


def _fmt(value):
    return repr(float(value))


def read_mot_csv(path):
    """Read a 9-column MOT CSV into an (n, 9) float array.

    Malformed rows abort with the offending line number.
    """
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 9:
                raise ValueError(
                    f"{path}: row {lineno}: expected 9 comma-separated fields, "
                    f"got {len(parts)}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise ValueError(
                    f"{path}: row {lineno}: non-numeric field in {line!r}"
                ) from None
    if not rows:
        return np.zeros((0, 9))
    arr = np.asarray(rows, dtype=float)
    if (arr[:, 4] <= 0).any() or (arr[:, 5] <= 0).any():
        bad = int(np.nonzero((arr[:, 4] <= 0) | (arr[:, 5] <= 0))[0][0]) + 1
        raise ValueError(f"{path}: row {bad}: box width/height must be positive")
    return arr


def write_mot_csv(path, rows):
    """Write an (n, 9) table as MOT CSV."""
    table = check_track_table(rows)
    with open(path, "w", encoding="ascii") as fh:
        for row in table:
            fields = [
                str(int(row[0])),
                str(int(row[1])),
                _fmt(row[2]),
                _fmt(row[3]),
                _fmt(row[4]),
                _fmt(row[5]),
                _fmt(row[6]),
                str(int(row[7])),
                _fmt(row[8]),
            ]
            fh.write(",".join(fields) + "\n")


def write_json(path, obj):
    """Write a JSON document with sorted keys (byte-deterministic)."""
    with open(path, "w", encoding="ascii") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_json(path):
    with open(path, "r", encoding="ascii") as fh:
        return json.load(fh)


def write_events_jsonl(path, events):
    """One violation event per line: pair, start/end frame, duration."""
    with open(path, "w", encoding="ascii") as fh:
        for event in events:
            fh.write(json.dumps(event.to_dict(), sort_keys=True) + "\n")


def write_csv(path, header, rows):
    """Small deterministic CSV export with a fixed header."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(
                str(v) if isinstance(v, int) else _fmt(v) for v in row
            ) + "\n")

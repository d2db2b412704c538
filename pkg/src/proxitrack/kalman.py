"""Constant-velocity Kalman filter over bounding-box observations.

State is the 7-vector (u, v, s, r, du, dv, ds): box center, area and
aspect ratio plus their rates, with the aspect ratio held constant.
Measurements are (u, v, s, r) converted from (x, y, w, h) boxes.
"""

import math

import numpy as np

_EPS = 1e-6
_I7 = np.eye(7)


def box_to_measurement(box):
    """(x, y, w, h) -> (center x, center y, area, aspect ratio)."""
    x, y, w, h = float(box[0]), float(box[1]), float(box[2]), float(box[3])
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(w) and math.isfinite(h)):
        raise ValueError("box entries must be finite")
    if w <= 0 or h <= 0:
        raise ValueError(f"box width/height must be positive, got w={w}, h={h}")
    return np.array([x + w / 2.0, y + h / 2.0, w * h, w / h])


def measurement_to_box(z):
    """(u, v, s, r) -> (x, y, w, h); s and r are floored at epsilon."""
    u, v = float(z[0]), float(z[1])
    s = max(float(z[2]), _EPS)
    r = max(float(z[3]), _EPS)
    w = math.sqrt(s * r)
    h = s / w
    return np.array([u - w / 2.0, v - h / 2.0, w, h])


class KalmanBoxFilter:
    """Track one box through time under a constant-velocity model.

    The measurement model observes the first four state components, so
    the update uses the corresponding covariance blocks directly.
    """

    def __init__(self, box, process_noise=1.0, measurement_noise=1.0):
        self.f = _I7.copy()
        self.f[0, 4] = self.f[1, 5] = self.f[2, 6] = 1.0

        self.q = np.eye(7) * process_noise
        self.q[4:, 4:] *= 1e-2
        self.r = np.diag([1.0, 1.0, 10.0, 10.0]) * measurement_noise

        self.x = np.zeros(7)
        self.x[:4] = box_to_measurement(box)
        # Velocities start at 0 and unobserved, so their covariance is
        # inflated 1000x relative to the observed block.
        self.p = np.eye(7) * 10.0
        self.p[4:, 4:] *= 1000.0

    def _clamp(self):
        if self.x[2] <= 0.0:
            self.x[2] = _EPS
            self.x[6] = 0.0
        if self.x[3] <= 0.0:
            self.x[3] = _EPS

    def predict(self):
        """Advance one frame; grows covariance by the process noise."""
        self.x[:3] += self.x[4:]
        self._clamp()
        p = self.f @ self.p @ self.f.T + self.q
        self.p = (p + p.T) / 2.0
        return self.x

    def update(self, box):
        """Fold in one (x, y, w, h) measurement."""
        z = box_to_measurement(box)
        innovation = z - self.x[:4]
        s = self.p[:4, :4] + self.r
        try:
            s_inv = np.linalg.inv(s)
        except np.linalg.LinAlgError:
            s_inv = np.linalg.inv(s + 1e-9 * np.eye(4))
        k = self.p[:, :4] @ s_inv
        self.x = self.x + k @ innovation
        self._clamp()
        # Joseph form keeps the covariance symmetric positive semi-definite.
        ikh = _I7.copy()
        ikh[:, :4] -= k
        p = ikh @ self.p @ ikh.T + k @ self.r @ k.T
        self.p = (p + p.T) / 2.0
        return self.x

    @property
    def box(self):
        """Current state as an (x, y, w, h) box."""
        return measurement_to_box(self.x)

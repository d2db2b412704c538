"""Frame conditioning: background subtraction, plane calibration, cropping.

Overhead intersection footage comes in slanted and low-contrast.  The
three estimators here run in pipeline order: subtract an alpha-weighted
mean frame to sharpen moving objects against the static scene, warp the
slanted view onto a uniform-scale ground plane, then crop away the
content-free border.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .validation import check_frame, check_points


def compute_mean_frame(frames):
    """Per-sample arithmetic mean of a sequence of same-shaped frames.

    Returns a float64 array; values stay within [0, 255].
    """
    frames = list(frames)
    if not frames:
        raise ValueError("cannot average an empty frame sequence")
    first = check_frame(frames[0])
    acc = first.astype(np.float64)
    for f in frames[1:]:
        f = check_frame(f)
        if f.shape != first.shape:
            raise ValueError(f"frame shape {f.shape} != {first.shape}")
        acc += f
    return acc / len(frames)


def subtract_background(frame, mean, alpha):
    """Subtract an alpha-weighted mean frame, clamp to [0, 255], round.

    Rounding is half-to-even so the output is reproducible bit for bit.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    frame = check_frame(frame)
    mean = np.asarray(mean, dtype=np.float64)
    if frame.shape != mean.shape:
        raise ValueError(f"frame shape {frame.shape} != mean shape {mean.shape}")
    out = np.clip(frame.astype(np.float64) - alpha * mean, 0.0, 255.0)
    return np.rint(out).astype(np.uint8)


class BackgroundSubtractor(TransformerMixin, BaseEstimator):
    """Weighted mean-frame background subtraction.

    Parameters
    ----------
    alpha : float in [0, 1], default 0.5
        Weight on the mean frame before subtraction.  0 passes frames
        through unchanged; 1 zeroes every static region.

    Attributes
    ----------
    mean_frame_ : float64 ndarray, the fitted per-sample mean.
    n_frames_ : number of frames that contributed to the mean.
    """

    def __init__(self, alpha=0.5):
        self.alpha = alpha

    def fit(self, X, y=None):
        self.mean_frame_ = compute_mean_frame(X)
        self.n_frames_ = len(list(X))
        return self

    def partial_fit(self, frame, y=None):
        """Fold one more frame into the running mean (single writer)."""
        frame = check_frame(frame)
        if not hasattr(self, "mean_frame_"):
            self.mean_frame_ = frame.astype(np.float64)
            self.n_frames_ = 1
            return self
        if frame.shape != self.mean_frame_.shape:
            raise ValueError(
                f"frame shape {frame.shape} != mean shape {self.mean_frame_.shape}"
            )
        self.n_frames_ += 1
        self.mean_frame_ += (frame - self.mean_frame_) / self.n_frames_
        return self

    def transform(self, X):
        """Apply the subtraction to one frame or a sequence of frames."""
        if not hasattr(self, "mean_frame_"):
            raise ValueError("BackgroundSubtractor is not fitted")
        arr = np.asarray(X)
        if arr.shape == self.mean_frame_.shape:
            return subtract_background(arr, self.mean_frame_, self.alpha)
        return np.stack(
            [subtract_background(f, self.mean_frame_, self.alpha) for f in X]
        )


def _normalization(points):
    """Hartley isotropic normalization: centroid at origin, mean norm sqrt(2)."""
    centroid = points.mean(axis=0)
    dist = np.sqrt(((points - centroid) ** 2).sum(axis=1)).mean()
    if dist < 1e-12:
        raise ValueError("degenerate correspondences: coincident points")
    s = np.sqrt(2.0) / dist
    t = np.array(
        [[s, 0.0, -s * centroid[0]], [0.0, s, -s * centroid[1]], [0.0, 0.0, 1.0]]
    )
    homog = np.column_stack([points, np.ones(len(points))])
    normed = homog @ t.T
    return t, normed[:, :2]


def estimate_homography(src_points, dst_points):
    """Least-squares plane homography from >= 4 point correspondences.

    Solves the direct linear system by SVD after isotropic point
    normalization, and returns a 3x3 matrix scaled so m[2][2] = 1.
    """
    src = check_points(src_points, "src_points")
    dst = check_points(dst_points, "dst_points")
    if src.shape != dst.shape:
        raise ValueError(f"src {src.shape} and dst {dst.shape} differ in shape")
    if src.shape[0] < 4:
        raise ValueError(f"need at least 4 correspondences, got {src.shape[0]}")
    t_src, src_n = _normalization(src)
    t_dst, dst_n = _normalization(dst)
    rows = []
    for (x, y), (u, v) in zip(src_n, dst_n):
        rows.append([x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, -u])
        rows.append([0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, -v])
    a = np.asarray(rows)
    _, s, vh = np.linalg.svd(a)
    # A clean nullspace is 1-D; a second vanishing singular value means
    # the configuration (e.g. 3 collinear source points) is degenerate.
    if s[0] <= 0 or s[-2] / s[0] < 1e-10:
        raise ValueError("degenerate correspondence configuration (rank-deficient)")
    h_n = vh[-1].reshape(3, 3)
    h = np.linalg.inv(t_dst) @ h_n @ t_src
    if abs(h[2, 2]) < 1e-12:
        raise ValueError("degenerate homography: cannot normalize m[2][2] to 1")
    h = h / h[2, 2]
    if abs(np.linalg.det(h)) <= 1e-12:
        raise ValueError("degenerate homography: matrix is singular")
    return h


def warp_points(matrix, points):
    """Map (n, 2) points through a homography with projective division."""
    pts = check_points(points)
    homog = np.column_stack([pts, np.ones(len(pts))]) @ np.asarray(matrix, float).T
    w = homog[:, 2]
    if (np.abs(w) < 1e-12).any():
        raise ValueError("point maps to the line at infinity")
    return homog[:, :2] / w[:, None]


def warp_box(matrix, box):
    """Warp a (x, y, w, h) box: map its corners, take the enclosing box."""
    x, y, w, h = box
    corners = np.array([[x, y], [x + w, y], [x, y + h], [x + w, y + h]])
    warped = warp_points(matrix, corners)
    lo = warped.min(axis=0)
    hi = warped.max(axis=0)
    return np.array([lo[0], lo[1], hi[0] - lo[0], hi[1] - lo[1]])


def warp_frame(matrix, frame, out_size=None, interpolation="bilinear"):
    """Resample a frame under a homography by inverse mapping.

    out_size is (width, height) of the result; defaults to the input
    size.  Pixels that map outside the source are set to 0.
    """
    frame = check_frame(frame)
    if interpolation not in ("bilinear", "nearest"):
        raise ValueError(f"unknown interpolation {interpolation!r}")
    h_in, w_in = frame.shape[:2]
    if out_size is None:
        w_out, h_out = w_in, h_in
    else:
        w_out, h_out = int(out_size[0]), int(out_size[1])
    inv = np.linalg.inv(np.asarray(matrix, dtype=float))
    xs, ys = np.meshgrid(np.arange(w_out, dtype=float), np.arange(h_out, dtype=float))
    denom = inv[2, 0] * xs + inv[2, 1] * ys + inv[2, 2]
    valid = np.abs(denom) > 1e-12
    denom = np.where(valid, denom, 1.0)
    sx = (inv[0, 0] * xs + inv[0, 1] * ys + inv[0, 2]) / denom
    sy = (inv[1, 0] * xs + inv[1, 1] * ys + inv[1, 2]) / denom

    plane = frame if frame.ndim == 3 else frame[:, :, None]
    out = np.zeros((h_out, w_out, plane.shape[2]), dtype=np.float64)
    if interpolation == "nearest":
        ix = np.rint(sx).astype(np.int64)
        iy = np.rint(sy).astype(np.int64)
        inside = valid & (ix >= 0) & (ix < w_in) & (iy >= 0) & (iy < h_in)
        out[inside] = plane[iy[inside], ix[inside]]
    else:
        x0 = np.floor(sx).astype(np.int64)
        y0 = np.floor(sy).astype(np.int64)
        fx = sx - x0
        fy = sy - y0
        inside = valid & (sx >= 0) & (sx <= w_in - 1) & (sy >= 0) & (sy <= h_in - 1)
        x0c = np.clip(x0, 0, w_in - 1)
        y0c = np.clip(y0, 0, h_in - 1)
        x1c = np.clip(x0 + 1, 0, w_in - 1)
        y1c = np.clip(y0 + 1, 0, h_in - 1)
        w00 = (1 - fx) * (1 - fy)
        w10 = fx * (1 - fy)
        w01 = (1 - fx) * fy
        w11 = fx * fy
        interp = (
            plane[y0c, x0c] * w00[:, :, None]
            + plane[y0c, x1c] * w10[:, :, None]
            + plane[y1c, x0c] * w01[:, :, None]
            + plane[y1c, x1c] * w11[:, :, None]
        )
        out[inside] = interp[inside]
    out = np.rint(np.clip(out, 0.0, 255.0)).astype(np.uint8)
    return out if frame.ndim == 3 else out[:, :, 0]


class PlaneCalibration(TransformerMixin, BaseEstimator):
    """Projective map from the slanted image plane to the ground plane.

    Fit with >= 4 image/ground correspondences, or construct from a
    known 3x3 matrix with `from_matrix`.  `transform` maps (n, 2)
    points; `warp_frame` resamples whole images.

    Attributes
    ----------
    matrix_ : 3x3 float ndarray, invertible, scaled so matrix_[2][2] = 1.
    """

    def __init__(self):
        pass

    def fit(self, X, y):
        self.matrix_ = estimate_homography(X, y)
        return self

    @classmethod
    def from_matrix(cls, matrix):
        m = np.asarray(matrix, dtype=float).reshape(3, 3)
        if abs(np.linalg.det(m)) <= 1e-12:
            raise ValueError("homography matrix must be invertible")
        if abs(m[2, 2]) < 1e-12:
            raise ValueError("homography matrix must have m[2][2] != 0")
        cal = cls()
        cal.matrix_ = m / m[2, 2]
        return cal

    def _check_fitted(self):
        if not hasattr(self, "matrix_"):
            raise ValueError("PlaneCalibration is not fitted")

    def transform(self, X):
        self._check_fitted()
        return warp_points(self.matrix_, X)

    def inverse_transform(self, X):
        self._check_fitted()
        return warp_points(np.linalg.inv(self.matrix_), X)

    def transform_box(self, box):
        self._check_fitted()
        return warp_box(self.matrix_, box)

    def warp_frame(self, frame, out_size=None, interpolation="bilinear"):
        self._check_fitted()
        return warp_frame(self.matrix_, frame, out_size, interpolation)


def center_crop(frame, x, y, width, height):
    """Copy the (x, y, width, height) sub-rectangle of a frame."""
    frame = check_frame(frame)
    if width <= 0 or height <= 0:
        raise ValueError(f"crop size must be positive, got {width}x{height}")
    h, w = frame.shape[:2]
    if x < 0 or y < 0 or x + width > w or y + height > h:
        raise ValueError(
            f"crop rect ({x},{y},{width},{height}) exceeds frame {w}x{h}"
        )
    return frame[y : y + height, x : x + width].copy()


class CenterCrop(TransformerMixin, BaseEstimator):
    """Fixed-rectangle crop; downstream coordinates live in cropped space."""

    def __init__(self, x=0, y=0, width=1, height=1):
        self.x = x
        self.y = y
        self.width = width
        self.height = height

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        arr = np.asarray(X)
        if arr.ndim == 2 or (arr.ndim == 3 and arr.shape[2] == 3):
            return center_crop(arr, self.x, self.y, self.width, self.height)
        return np.stack(
            [center_crop(f, self.x, self.y, self.width, self.height) for f in X]
        )

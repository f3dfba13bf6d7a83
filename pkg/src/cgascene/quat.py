"""Unit-quaternion helpers (w, x, y, z convention, right-handed axes).

Plain ndarray-in / ndarray-out functions; kept free of any CGA machinery so
the scene model and the LLM gateway can share them.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import NotUnit

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def normalize(q, tol: float = 1e-9) -> np.ndarray:
    """Return q / |q|, raising NotUnit when |q| deviates from 1 beyond tol."""
    q = np.asarray(q, dtype=float)
    n = float(np.linalg.norm(q))
    if abs(n - 1.0) > tol:
        raise NotUnit(f"quaternion norm {n} deviates from 1 beyond {tol}")
    return q / n


def multiply(q1, q2) -> np.ndarray:
    """Hamilton product q1 * q2 (apply q2's rotation first)."""
    w1, x1, y1, z1 = q1
    w2, x2, y2, z2 = q2
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def conjugate(q) -> np.ndarray:
    w, x, y, z = q
    return np.array([w, -x, -y, -z])


def rotate(q, v) -> np.ndarray:
    """Rotate 3-vector v by unit quaternion q."""
    return to_matrix(q) @ np.asarray(v, dtype=float)


def to_matrix(q) -> np.ndarray:
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def from_matrix(m) -> np.ndarray:
    """Unit quaternion from a 3x3 rotation matrix (max-diagonal branch)."""
    m = np.asarray(m, dtype=float)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > max(m[0, 0], m[1, 1], m[2, 2]):
        s = math.sqrt(tr + 1.0) * 2.0
        q = np.array([0.25 * s,
                      (m[2, 1] - m[1, 2]) / s,
                      (m[0, 2] - m[2, 0]) / s,
                      (m[1, 0] - m[0, 1]) / s])
    else:
        i = int(np.argmax([m[0, 0], m[1, 1], m[2, 2]]))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = math.sqrt(max(m[i, i] - m[j, j] - m[k, k] + 1.0, 0.0)) * 2.0
        q = np.empty(4)
        q[0] = (m[k, j] - m[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (m[j, i] + m[i, j]) / s
        q[1 + k] = (m[k, i] + m[i, k]) / s
    return q / np.linalg.norm(q)


def from_axis_angle(axis, angle_rad: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    half = 0.5 * angle_rad
    return np.concatenate(([math.cos(half)], math.sin(half) * axis))


def from_euler_zyx_degrees(ez: float, ey: float, ex: float) -> np.ndarray:
    """Intrinsic Z-Y'-X'' rotation from degrees (applied z first, then y, then x)."""
    qz = from_axis_angle([0, 0, 1], math.radians(ez))
    qy = from_axis_angle([0, 1, 0], math.radians(ey))
    qx = from_axis_angle([1, 0, 0], math.radians(ex))
    return multiply(multiply(qz, qy), qx)


def to_euler_zyx_degrees(q) -> tuple[float, float, float]:
    """Inverse of from_euler_zyx_degrees; gimbal-locked pitch folds into ez."""
    m = to_matrix(q)
    sy = -m[2, 0]
    sy = min(1.0, max(-1.0, sy))
    ey = math.asin(sy)
    if abs(sy) < 1.0 - 1e-12:
        ez = math.atan2(m[1, 0], m[0, 0])
        ex = math.atan2(m[2, 1], m[2, 2])
    else:
        ez = math.atan2(-m[0, 1], m[1, 1])
        ex = 0.0
    return math.degrees(ez), math.degrees(ey), math.degrees(ex)


def canonical_sign(q) -> np.ndarray:
    """Flip sign so the scalar part is nonnegative (first nonzero component if w=0)."""
    q = np.asarray(q, dtype=float)
    for c in q:
        if c > 0.0:
            return q
        if c < 0.0:
            return -q
    return q

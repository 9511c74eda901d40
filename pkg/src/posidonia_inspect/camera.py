"""Downward camera geometry over a flat seafloor.

The camera points straight down from a given altitude.  Image columns
grow toward the vehicle's right, rows grow backward, so the top edge of
the frame shows what lies ahead of the vehicle.  All pixel coordinates
are continuous with the pixel-center convention: integer coordinate
``(col, row)`` is the center of that pixel, the image spans
``[-0.5, width - 0.5]`` horizontally.

World frame: x east, y north, yaw measured counterclockwise from +x.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import Polygon

__all__ = [
    "CameraModel",
    "footprint_half_extents",
    "footprint_polygon",
    "pixel_to_local",
    "local_to_world",
    "pixel_to_world",
    "world_to_pixel",
    "pixel_grid_world",
]


@dataclass(frozen=True)
class CameraModel:
    """Field of view and sensor resolution of the downward camera."""

    hfov_deg: float = 90.0
    vfov_deg: float = 70.0
    width: int = 128
    height: int = 96

    def __post_init__(self) -> None:
        for name in ("hfov_deg", "vfov_deg"):
            fov = getattr(self, name)
            if not (isinstance(fov, (int, float)) and math.isfinite(fov)):
                raise ValueError(f"{name} must be a finite number")
            if not 0.0 < fov < 180.0:
                raise ValueError(f"{name} must lie in (0, 180) degrees")
        for name in ("width", "height"):
            dim = getattr(self, name)
            if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
                raise ValueError(f"{name} must be a positive integer")

    @property
    def tan_half_h(self) -> float:
        return math.tan(math.radians(self.hfov_deg) / 2.0)

    @property
    def tan_half_v(self) -> float:
        return math.tan(math.radians(self.vfov_deg) / 2.0)


def _check_altitude(altitude: float) -> float:
    alt = float(altitude)
    if not math.isfinite(alt) or alt <= 0.0:
        raise ValueError("altitude must be positive and finite")
    return alt


def footprint_half_extents(camera: CameraModel, altitude: float) -> tuple[float, float]:
    """Half extents (lateral, forward) of the imaged ground rectangle."""
    alt = _check_altitude(altitude)
    return alt * camera.tan_half_h, alt * camera.tan_half_v


def pixel_to_local(
    camera: CameraModel, col, row, altitude: float
):
    """Map continuous pixel coordinates to (forward, right) ground offsets.

    Accepts scalars or arrays; returns matching float arrays or floats.
    """
    alt = _check_altitude(altitude)
    u = (np.asarray(col, dtype=float) + 0.5) / camera.width
    v = (np.asarray(row, dtype=float) + 0.5) / camera.height
    right = (u - 0.5) * 2.0 * alt * camera.tan_half_h
    forward = (0.5 - v) * 2.0 * alt * camera.tan_half_v
    if np.isscalar(col) and np.isscalar(row):
        return float(forward), float(right)
    return forward, right


def local_to_world(x: float, y: float, yaw: float, forward, right):
    """Rotate (forward, right) body offsets into world coordinates."""
    c, s = math.cos(yaw), math.sin(yaw)
    wx = x + forward * c + right * s
    wy = y + forward * s - right * c
    return wx, wy


def pixel_to_world(
    camera: CameraModel,
    col,
    row,
    x: float,
    y: float,
    yaw: float,
    altitude: float,
):
    forward, right = pixel_to_local(camera, col, row, altitude)
    return local_to_world(x, y, yaw, forward, right)


def world_to_pixel(
    camera: CameraModel,
    wx,
    wy,
    x: float,
    y: float,
    yaw: float,
    altitude: float,
):
    """Inverse of :func:`pixel_to_world` for points on the seafloor plane."""
    alt = _check_altitude(altitude)
    c, s = math.cos(yaw), math.sin(yaw)
    dx = np.asarray(wx, dtype=float) - x
    dy = np.asarray(wy, dtype=float) - y
    forward = dx * c + dy * s
    right = dx * s - dy * c
    u = right / (2.0 * alt * camera.tan_half_h) + 0.5
    v = 0.5 - forward / (2.0 * alt * camera.tan_half_v)
    col = u * camera.width - 0.5
    row = v * camera.height - 0.5
    if np.isscalar(wx) and np.isscalar(wy):
        return float(col), float(row)
    return col, row


def footprint_polygon(
    camera: CameraModel, x: float, y: float, yaw: float, altitude: float
) -> Polygon:
    """World-frame rectangle imaged by the camera, counterclockwise."""
    half_r, half_f = footprint_half_extents(camera, altitude)
    corners = []
    # front-right, front-left, back-left, back-right: CCW for yaw = 0
    for f_sign, r_sign in ((1.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-1.0, 1.0)):
        wx, wy = local_to_world(x, y, yaw, f_sign * half_f, r_sign * half_r)
        corners.append((wx, wy))
    return Polygon(np.array(corners, dtype=float), frame="world")


@functools.lru_cache(maxsize=8)
def _unit_grid(camera: CameraModel) -> tuple[np.ndarray, np.ndarray]:
    # altitude-independent pixel-center offsets in [-0.5, 0.5]
    cols = (np.arange(camera.width, dtype=float) + 0.5) / camera.width - 0.5
    rows = 0.5 - (np.arange(camera.height, dtype=float) + 0.5) / camera.height
    right_u, forward_u = np.meshgrid(cols, rows)
    right_u.setflags(write=False)
    forward_u.setflags(write=False)
    return forward_u, right_u


def pixel_grid_world(
    camera: CameraModel, x: float, y: float, yaw: float, altitude: float
) -> tuple[np.ndarray, np.ndarray]:
    """World coordinates of every pixel center as two (H, W) arrays."""
    alt = _check_altitude(altitude)
    forward_u, right_u = _unit_grid(camera)
    forward = forward_u * 2.0 * alt * camera.tan_half_v
    right = right_u * 2.0 * alt * camera.tan_half_h
    return local_to_world(x, y, yaw, forward, right)

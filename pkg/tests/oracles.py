"""Slow, independent re-derivations used to cross-check the library.

Everything here is written from first principles with a different algorithm
than the implementation under test: O(n^3) edge-test hull, winding-number
membership, flood-fill boundary sets, and set-based IoU counting.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np


def brute_hull_vertices(points: np.ndarray) -> set[tuple[float, float]]:
    """Hull vertex set via the O(n^3) test: an edge (i, j) is on the hull iff
    every other point lies strictly on its left."""
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    verts: set[tuple[float, float]] = set()
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            d = pts[j] - pts[i]
            rel = pts - pts[i]
            cross = d[0] * rel[:, 1] - d[1] * rel[:, 0]
            mask = np.ones(n, dtype=bool)
            mask[[i, j]] = False
            if np.all(cross[mask] > 0.0):
                verts.add((float(pts[i][0]), float(pts[i][1])))
                verts.add((float(pts[j][0]), float(pts[j][1])))
    return verts


def brute_hull_area(points: np.ndarray) -> float:
    """Hull area from the brute-force vertex set, ordered by angle."""
    verts = np.array(sorted(brute_hull_vertices(points)))
    center = verts.mean(axis=0)
    ang = np.arctan2(verts[:, 1] - center[1], verts[:, 0] - center[0])
    v = verts[np.argsort(ang)]
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))


def winding_inside(point, vertices, include_boundary: bool = True) -> bool:
    """Membership by accumulating signed angles around the point."""
    px, py = float(point[0]), float(point[1])
    verts = np.asarray(vertices, dtype=np.float64)
    n = verts.shape[0]
    total = 0.0
    for i in range(n):
        ax, ay = verts[i] - (px, py)
        bx, by = verts[(i + 1) % n] - (px, py)
        if _on_segment(px, py, verts[i], verts[(i + 1) % n]):
            return include_boundary
        total += math.atan2(ax * by - ay * bx, ax * bx + ay * by)
    return abs(total) > math.pi  # ~2*pi inside, ~0 outside


def _on_segment(px, py, a, b, tol=1e-9) -> bool:
    ax, ay = a
    bx, by = b
    scale = max(1.0, abs(ax), abs(ay), abs(bx), abs(by), abs(px), abs(py))
    dx, dy = bx - ax, by - ay
    len2 = dx * dx + dy * dy
    if len2 == 0.0:
        t = 0.0
    else:
        t = min(1.0, max(0.0, ((px - ax) * dx + (py - ay) * dy) / len2))
    cx, cy = ax + t * dx, ay + t * dy
    return (px - cx) ** 2 + (py - cy) ** 2 <= (tol * scale) ** 2


def outer_boundary_pixels(mask: np.ndarray) -> set[tuple[int, int]]:
    """Foreground pixels 4-adjacent to the background region that touches the
    frame, found by flood fill over a padded copy.  Returned as (x, y)."""
    mask = np.asarray(mask) != 0
    rows, cols = mask.shape
    padded = np.zeros((rows + 2, cols + 2), dtype=bool)
    padded[1:-1, 1:-1] = mask
    outside = np.zeros_like(padded)
    queue: deque[tuple[int, int]] = deque([(0, 0)])
    outside[0, 0] = True
    while queue:
        r, c = queue.popleft()
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < rows + 2 and 0 <= cc < cols + 2 and not outside[rr, cc] and not padded[rr, cc]:
                outside[rr, cc] = True
                queue.append((rr, cc))
    result: set[tuple[int, int]] = set()
    for r in range(rows):
        for c in range(cols):
            if not mask[r, c]:
                continue
            for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                if outside[r + 1 + dr, c + 1 + dc]:
                    result.add((c, r))
                    break
    return result


def count_components_8(mask: np.ndarray) -> int:
    """8-connected component count by BFS flood fill."""
    mask = np.asarray(mask) != 0
    rows, cols = mask.shape
    seen = np.zeros_like(mask)
    count = 0
    for r0 in range(rows):
        for c0 in range(cols):
            if not mask[r0, c0] or seen[r0, c0]:
                continue
            count += 1
            queue = deque([(r0, c0)])
            seen[r0, c0] = True
            while queue:
                r, c = queue.popleft()
                for dr in (-1, 0, 1):
                    for dc in (-1, 0, 1):
                        rr, cc = r + dr, c + dc
                        if 0 <= rr < rows and 0 <= cc < cols and mask[rr, cc] and not seen[rr, cc]:
                            seen[rr, cc] = True
                            queue.append((rr, cc))
    return count


def iou_by_sets(gt: np.ndarray, pred: np.ndarray, cls: int) -> float:
    """IoU for one class by enumerating pixel index sets."""
    g = {i for i, v in enumerate(np.asarray(gt).ravel().tolist()) if v == cls}
    p = {i for i, v in enumerate(np.asarray(pred).ravel().tolist()) if v == cls}
    union = g | p
    if not union:
        return 1.0
    return len(g & p) / len(union)


def mean_iou_by_sets(pairs, classes) -> float:
    """Mean over (pair, class) elements where the class shows up somewhere."""
    vals = []
    for gt, pred in pairs:
        for cls in classes:
            g = np.asarray(gt)
            p = np.asarray(pred)
            if (g == cls).any() or (p == cls).any():
                vals.append(iou_by_sets(g, p, cls))
    return sum(vals) / len(vals) if vals else 1.0
